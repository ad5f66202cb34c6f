"""Compact CMT transmultiplexer: VSB subcarriers with 0/pi-2 phase toggling.

Real PAM frames ride on vestigial-sideband subcarriers spaced at the symbol
rate; adjacent subcarriers are phase-toggled by i**k so that, after matched
filtering and real-part extraction, inter-symbol and inter-carrier leakage
lands entirely in the imaginary part (the intrinsic interference q).  This
module runs single-antenna loopback only; the array experiments use the
abstract per-subcarrier model with sigma_q calibrated here.

Synthesis is critically sampled at L samples per symbol period with
direct-form (FFT) convolution; no polyphase structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve


@dataclass(frozen=True)
class CmtConfig:
    """Transmultiplexer dimensions.

    Attributes
    ----------
    num_subcarriers : int
        L; also the number of samples per symbol period.
    subcarrier_spacing : float
        Hz; equals the PAM symbol rate.
    overlap_factor : int
        Prototype length in symbol periods.
    rolloff : float
        Excess-bandwidth factor of the prototype, in (0, 1].
    """

    num_subcarriers: int
    subcarrier_spacing: float
    overlap_factor: int
    rolloff: float

    def __post_init__(self) -> None:
        if self.num_subcarriers < 2:
            raise ValueError("num_subcarriers must be >= 2")
        if self.overlap_factor < 4:
            raise ValueError("overlap_factor must be >= 4")
        if not 0.0 < self.rolloff <= 1.0:
            raise ValueError("rolloff must lie in (0, 1]")
        if self.subcarrier_spacing <= 0.0:
            raise ValueError("subcarrier_spacing must be positive")


@dataclass(frozen=True)
class PrototypeFilter:
    """Unit-energy linear-phase prototype."""

    coefficients: np.ndarray
    length: int

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=float)
        if c.size != self.length:
            raise ValueError("length field does not match coefficient count")
        if abs(np.sum(c * c) - 1.0) > 1e-12:
            raise ValueError("prototype must have unit energy")
        if np.max(np.abs(c - c[::-1])) > 1e-12:
            raise ValueError("prototype must be even-symmetric")
        object.__setattr__(self, "coefficients", c)


@dataclass(frozen=True)
class IntrinsicStats:
    """Loopback statistics of the intrinsic interference.

    ``sigma_q_sq`` is the variance of the imaginary part q in units of
    symbol energy; the kurtosis fields are plain (non-excess) kurtosis, 3
    for a Gaussian; ``real_part_alphabet_error_rate`` is the sign-decision
    error rate of the equalized real part in noiseless loopback.
    """

    sigma_q_sq: float
    kurtosis_imag: float
    kurtosis_real_unequalized: float
    real_part_alphabet_error_rate: float

    def __post_init__(self) -> None:
        if self.sigma_q_sq < 0.0:
            raise ValueError("sigma_q_sq must be >= 0")


def _srrc(t: np.ndarray, beta: float) -> np.ndarray:
    """Square-root raised-cosine impulse response; t in symbol periods."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    tol = 1e-10
    at_zero = np.abs(t) < tol
    at_knee = np.abs(np.abs(t) - 1.0 / (4.0 * beta)) < tol
    regular = ~(at_zero | at_knee)
    tr = t[regular]
    num = np.sin(np.pi * tr * (1 - beta)) + 4 * beta * tr * np.cos(np.pi * tr * (1 + beta))
    den = np.pi * tr * (1.0 - (4.0 * beta * tr) ** 2)
    out[regular] = num / den
    out[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    out[at_knee] = (beta / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
    )
    return out


def design_prototype(config: CmtConfig) -> PrototypeFilter:
    """Square-root raised-cosine prototype sampled at L samples per symbol.

    The filter spans ``overlap_factor`` symbol periods plus one sample so
    its center falls on a sample and the even symmetry is exact; it is
    normalized to unit energy.  Its self-convolution satisfies the Nyquist
    zero-crossing property at nonzero integer symbol lags (how closely
    depends on rolloff and overlap; see the invariant tests).
    """
    span = config.overlap_factor * config.num_subcarriers
    idx = np.arange(span + 1)
    g = _srrc((idx - span // 2) / config.num_subcarriers, config.rolloff)
    g /= np.sqrt(np.sum(g * g))
    return PrototypeFilter(coefficients=g, length=span + 1)


def _carrier(config: CmtConfig, k: int, num_samples: int, phase_toggle: bool) -> np.ndarray:
    n = np.arange(num_samples)
    c = np.exp(2j * np.pi * k * n / config.num_subcarriers)
    if phase_toggle:
        c = c * (1j ** k)
    return c


def cmt_synthesize(
    pam_frames: np.ndarray,
    config: CmtConfig,
    proto: PrototypeFilter,
    phase_toggle: bool = True,
) -> np.ndarray:
    """Modulate real PAM frames onto all L subcarriers.

    Parameters
    ----------
    pam_frames : ndarray, shape (L, num_symbols)
        Row k holds subcarrier k's PAM stream.
    phase_toggle : bool
        Apply the i**k toggle between adjacent subcarriers.  Disabling it
        breaks the real/imaginary separation; exposed for validation only.

    Returns
    -------
    ndarray, complex, length (num_symbols + overlap_factor) * L
    """
    frames = np.asarray(pam_frames, dtype=float)
    L = config.num_subcarriers
    if frames.ndim != 2 or frames.shape[0] != L:
        raise ValueError(f"pam_frames must have shape ({L}, num_symbols)")
    num_symbols = frames.shape[1]
    out_len = (num_symbols + config.overlap_factor) * L
    out = np.zeros(out_len, dtype=complex)
    for k in range(L):
        if not np.any(frames[k]):
            continue
        upsampled = np.zeros((num_symbols - 1) * L + 1)
        upsampled[::L] = frames[k]
        stream = fftconvolve(upsampled, proto.coefficients)
        out[: stream.size] += stream * _carrier(config, k, stream.size, phase_toggle)
    return out


def cmt_demodulate(
    samples: np.ndarray,
    subcarrier_index: int,
    config: CmtConfig,
    proto: PrototypeFilter,
    one_tap_equalizer: complex = 1.0,
    phase_toggle: bool = True,
    num_symbols: int | None = None,
) -> np.ndarray:
    """Demodulate one subcarrier: down-convert, matched-filter, equalize.

    Returns the complex pre-decision sequence y_k(n); the real part is the
    PAM decision variable and the imaginary part is the intrinsic
    interference, left to the caller so both can be inspected.
    """
    if not 0 <= subcarrier_index < config.num_subcarriers:
        raise ValueError(
            f"subcarrier_index {subcarrier_index} outside [0, {config.num_subcarriers})"
        )
    eq = complex(one_tap_equalizer)
    if not np.isfinite([eq.real, eq.imag]).all() or eq == 0:
        raise ValueError("one_tap_equalizer must be finite and nonzero")
    samples = np.asarray(samples)
    L = config.num_subcarriers
    if num_symbols is None:
        num_symbols = samples.size // L - config.overlap_factor
    if num_symbols < 1:
        raise ValueError("sample stream too short for one symbol")
    down = samples * np.conj(_carrier(config, subcarrier_index, samples.size, phase_toggle))
    filtered = fftconvolve(down, proto.coefficients)
    first = config.overlap_factor * L  # group delay of filter pair
    idx = first + np.arange(num_symbols) * L
    return eq * filtered[idx]


def _random_multipath(config: CmtConfig, rng: np.random.Generator) -> np.ndarray:
    """Short random complex FIR used for the unequalized-statistics pass."""
    L = config.num_subcarriers
    num_taps = 6
    delays = np.concatenate(([0], np.sort(rng.choice(np.arange(1, L), size=num_taps - 1, replace=False))))
    powers = np.exp(-delays / (L / 2.0))
    powers /= powers.sum()
    gains = np.sqrt(powers / 2.0) * (rng.standard_normal(num_taps) + 1j * rng.standard_normal(num_taps))
    fir = np.zeros(delays[-1] + 1, dtype=complex)
    fir[delays] = gains
    return fir


def measure_intrinsic_stats(
    config: CmtConfig,
    proto: PrototypeFilter,
    rng: np.random.Generator,
    num_frames: int,
    min_samples: int = 100_000,
) -> IntrinsicStats:
    """Loopback statistics over i.i.d. binary PAM on all subcarriers.

    Runs a noiseless synthesize/demodulate loopback over ``num_frames``
    multicarrier symbols, discards ``overlap_factor`` edge symbols on each
    side, and pools the interior of every subcarrier.  Reports the variance
    and kurtosis of the imaginary part, the sign-decision error rate of the
    equalized real part, and the kurtosis of the real part after passing
    the same stream through a random multipath channel with no equalizer
    (the unequalized-symbol statistic).

    Raises if the interior yields fewer than ``min_samples`` symbols.
    """
    L = config.num_subcarriers
    edge = config.overlap_factor
    interior_per_sub = num_frames - 2 * edge
    if interior_per_sub < 1 or interior_per_sub * L < min_samples:
        raise ValueError(
            f"num_frames={num_frames} yields {max(interior_per_sub, 0) * L} interior "
            f"symbols; need at least {min_samples}"
        )
    frames = rng.choice([-1.0, 1.0], size=(L, num_frames))
    x = cmt_synthesize(frames, config, proto)
    x_multipath = fftconvolve(x, _random_multipath(config, rng))[: x.size]

    interior = slice(edge, num_frames - edge)
    q_parts = np.empty((L, interior_per_sub))
    real_err = 0
    real_unequalized = np.empty((L, interior_per_sub))
    for k in range(L):
        y = cmt_demodulate(x, k, config, proto, num_symbols=num_frames)
        q_parts[k] = y.imag[interior]
        real_err += np.count_nonzero(np.sign(y.real[interior]) != frames[k][interior])
        y_mp = cmt_demodulate(x_multipath, k, config, proto, num_symbols=num_frames)
        real_unequalized[k] = y_mp.real[interior]

    q = q_parts.ravel()
    u = real_unequalized.ravel()
    q_var = q.var()
    u_c = u - u.mean()
    return IntrinsicStats(
        sigma_q_sq=float(q_var),
        kurtosis_imag=float(np.mean((q - q.mean()) ** 4) / q_var**2),
        kurtosis_real_unequalized=float(np.mean(u_c**4) / np.mean(u_c**2) ** 2),
        real_part_alphabet_error_rate=float(real_err / q.size),
    )

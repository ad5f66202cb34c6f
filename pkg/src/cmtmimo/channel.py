"""Frequency-selective Rayleigh channel generation from a power-delay profile.

Each (cell, BS, user, antenna) link gets an independent set of complex
Gaussian taps whose per-tap variances follow the profile; per-subcarrier
flat gains are the exact discrete frequency response of those taps at the
subcarrier center frequency.  Channels are block-constant (quasi-static).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import CellTopology


@dataclass(frozen=True)
class PowerDelayProfile:
    """Multipath tap delays and normalized linear powers.

    Attributes
    ----------
    tap_delays : ndarray
        Delays in seconds, nonnegative and strictly increasing.
    tap_powers : ndarray
        Linear powers summing to 1 (unit average channel energy).
    """

    tap_delays: np.ndarray
    tap_powers: np.ndarray

    def __post_init__(self) -> None:
        delays = np.asarray(self.tap_delays, dtype=float)
        powers = np.asarray(self.tap_powers, dtype=float)
        if delays.size == 0 or delays.size != powers.size:
            raise ValueError("delays and powers must be nonempty and equal length")
        if delays[0] < 0.0 or np.any(np.diff(delays) <= 0.0):
            raise ValueError("delays must be nonnegative and strictly increasing")
        if np.any(powers <= 0.0):
            raise ValueError("tap powers must be positive")
        if abs(powers.sum() - 1.0) > 1e-12:
            raise ValueError("tap powers must sum to 1 within 1e-12")
        object.__setattr__(self, "tap_delays", delays)
        object.__setattr__(self, "tap_powers", powers)

    @classmethod
    def from_db(cls, delays_us, powers_db) -> "PowerDelayProfile":
        """Build from delays in microseconds and relative powers in dB.

        Powers are converted to linear scale and normalized to unit sum.
        """
        delays = np.asarray(delays_us, dtype=float) * 1e-6
        powers = 10.0 ** (np.asarray(powers_db, dtype=float) / 10.0)
        total = powers.sum()
        if total <= 0.0:
            raise ValueError("profile has no power")
        return cls(tap_delays=delays, tap_powers=powers / total)

    @property
    def num_taps(self) -> int:
        return self.tap_delays.size


# COST 207 typical-urban reduced 6-tap profile (delays us, powers dB).
COST207_TU6 = PowerDelayProfile.from_db(
    delays_us=(0.0, 0.2, 0.5, 1.6, 2.3, 5.0),
    powers_db=(-3.0, 0.0, -2.0, -6.0, -8.0, -10.0),
)


@dataclass(frozen=True)
class ChannelRealization:
    """One quasi-static draw of every link's multipath taps.

    Attributes
    ----------
    taps : ndarray, shape (M, M, K, N, T), complex
        ``taps[m, j, l, a, t]``: tap t of the link from user l of cell m
        to antenna a of BS j.
    pdp : PowerDelayProfile
        The profile the taps were drawn from (delays are reused by
        frequency-response evaluation).
    num_antennas : int
    sample_rate : float
        Total bandwidth in Hz; subcarrier k sits at k * sample_rate / L.
    num_subcarriers : int
    """

    taps: np.ndarray
    pdp: PowerDelayProfile
    num_antennas: int
    sample_rate: float
    num_subcarriers: int

    def __post_init__(self) -> None:
        if self.taps.ndim != 5:
            raise ValueError("taps must have shape (M, M, K, N, T)")
        if self.taps.shape[3] != self.num_antennas:
            raise ValueError("antenna axis inconsistent with num_antennas")
        if self.taps.shape[4] != self.pdp.num_taps:
            raise ValueError("tap axis inconsistent with the profile")
        if self.sample_rate <= 0.0:
            raise ValueError("sample_rate must be positive")
        if self.num_subcarriers < 1:
            raise ValueError("num_subcarriers must be >= 1")


@dataclass(frozen=True)
class SubcarrierChannel:
    """Flat gain vector of one link at one subcarrier."""

    h: np.ndarray
    subcarrier_index: int

    def __post_init__(self) -> None:
        if self.h.ndim != 1:
            raise ValueError("h must be a vector (one antenna axis)")


def draw_channels(
    topology: CellTopology,
    pdp: PowerDelayProfile,
    num_antennas: int,
    rng: np.random.Generator,
    sample_rate: float = 5e6,
    num_subcarriers: int = 256,
) -> ChannelRealization:
    """Draw i.i.d. Rayleigh taps for every link of the topology.

    Tap t of every (m, j, l, a) link is circularly-symmetric complex
    Gaussian with variance ``pdp.tap_powers[t]``, independent across all
    indices (uncorrelated array, uncorrelated links).
    """
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    m, k, t = topology.num_cells, topology.users_per_cell, pdp.num_taps
    shape = (m, m, k, num_antennas, t)
    scale = np.sqrt(pdp.tap_powers / 2.0)
    taps = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return ChannelRealization(
        taps=taps,
        pdp=pdp,
        num_antennas=num_antennas,
        sample_rate=sample_rate,
        num_subcarriers=num_subcarriers,
    )


def freq_response(
    taps: np.ndarray,
    tap_delays: np.ndarray,
    subcarrier_index: int,
    num_subcarriers: int,
    bandwidth: float,
) -> np.ndarray:
    """Discrete frequency response H(f_k) = sum_t g_t exp(-2i pi f_k tau_t).

    ``taps`` may carry leading axes; the tap axis is the last one.  The
    subcarrier center is f_k = k * bandwidth / num_subcarriers.

    Returns the response with the tap axis contracted away (a scalar for a
    single link, a vector for a stack of antennas, ...).
    """
    if not 0 <= subcarrier_index < num_subcarriers:
        raise ValueError(
            f"subcarrier_index {subcarrier_index} outside [0, {num_subcarriers})"
        )
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be positive")
    f_k = subcarrier_index * bandwidth / num_subcarriers
    phase = np.exp(-2j * np.pi * f_k * np.asarray(tap_delays, dtype=float))
    return np.asarray(taps) @ phase


def channel_matrix(
    realization: ChannelRealization,
    source_cell: int,
    receiving_bs: int,
    subcarrier_index: int,
) -> np.ndarray:
    """Per-subcarrier channel matrix H_mj, shape (N, K).

    Column l is the flat gain vector of user l of ``source_cell`` at
    ``receiving_bs``, i.e. the frequency response of that link's taps.
    """
    m = realization.taps.shape[0]
    k = realization.taps.shape[2]
    if not (0 <= source_cell < m and 0 <= receiving_bs < m):
        raise ValueError("cell index out of range")
    link_taps = realization.taps[source_cell, receiving_bs]  # (K, N, T)
    h = freq_response(
        link_taps,
        realization.pdp.tap_delays,
        subcarrier_index,
        realization.num_subcarriers,
        realization.sample_rate,
    )  # (K, N)
    return h.T


def subcarrier_channel(
    realization: ChannelRealization,
    source_cell: int,
    receiving_bs: int,
    user: int,
    subcarrier_index: int,
) -> SubcarrierChannel:
    """Flat gain vector of a single link at one subcarrier."""
    if not 0 <= user < realization.taps.shape[2]:
        raise ValueError("user index out of range")
    h = channel_matrix(realization, source_cell, receiving_bs, subcarrier_index)
    return SubcarrierChannel(h=h[:, user], subcarrier_index=subcarrier_index)


def matrix_stack(realization: ChannelRealization, subcarrier_index: int) -> np.ndarray:
    """All channel matrices at one subcarrier, shape (M, M, N, K).

    ``stack[m, j]`` is ``channel_matrix(realization, m, j, subcarrier_index)``.
    """
    if not 0 <= subcarrier_index < realization.num_subcarriers:
        raise ValueError(
            f"subcarrier_index {subcarrier_index} outside "
            f"[0, {realization.num_subcarriers})"
        )
    phase = np.exp(
        -2j
        * np.pi
        * (subcarrier_index * realization.sample_rate / realization.num_subcarriers)
        * realization.pdp.tap_delays
    )
    h = realization.taps @ phase  # (M, M, K, N)
    return np.swapaxes(h, 2, 3)

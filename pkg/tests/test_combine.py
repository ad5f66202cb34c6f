import numpy as np
import pytest

from cmtmimo import airlink, channel, combine, harness, topology


def test_mf_identity():
    rng = np.random.default_rng(0)
    for _ in range(20):
        h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        weights = combine.mf_weights(h)
        assert weights.kind == "MF"
        assert abs(np.vdot(weights.w, h) - 1.0) < 1e-12


def test_mf_weights_rejects_zero_channel():
    with pytest.raises(ValueError):
        combine.mf_weights(np.zeros(4, dtype=complex))


def test_mf_detect_normalizer_and_frame_input():
    rng = np.random.default_rng(1)
    h = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    s = np.array([1.0, -1.0])
    x = h @ s
    norm = combine.GainNormalizer.from_channel(h)
    out = combine.mf_detect(x, h, norm)
    # cross-user terms leak, but the self term is exactly s_l
    self_term = np.real(np.einsum("nl,nl->l", h.conj(), h)) * s / norm.d
    cross = np.real(h.conj().T @ h) / norm.d[:, None]
    expected = cross @ s
    assert np.allclose(out, expected, atol=1e-13)
    assert np.allclose(np.diag(cross) * s, self_term * 0 + s, atol=1e-13)
    frame = airlink.ReceivedFrame(x=x, noise_var=0.0)
    assert np.allclose(combine.mf_detect(frame, h, norm), out, atol=1e-15)


def test_q_component_invisible_with_perfect_csi():
    rng = np.random.default_rng(2)
    h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    w = combine.mf_weights(h).w
    s, q = -1.0, 0.7
    y = np.real(np.vdot(w, h * (s + 1j * q)))
    assert abs(y - s) < 1e-12


def test_mmse_reduces_to_mf_without_interference():
    # single cell, single user: the covariance is rank-one plus identity,
    # so the MMSE direction is collinear with h
    rng = np.random.default_rng(3)
    h = (rng.standard_normal(16) + 1j * rng.standard_normal(16)).reshape(16, 1)
    w = combine.mmse_weights(h[None], np.ones((1, 1)), 0, 0.3, 2.0)[0]
    cos = abs(np.vdot(w.w, h[:, 0])) / (
        np.linalg.norm(w.w) * np.linalg.norm(h[:, 0])
    )
    assert abs(cos - 1.0) < 1e-10
    assert np.real(np.vdot(w.w, h[:, 0])) == pytest.approx(1.0, abs=1e-12)
    assert w.kind == "MMSE"


def test_mmse_beats_mf_under_contamination():
    rng = np.random.default_rng(4)
    for _ in range(5):
        topo = topology.build_topology(3, 1, 0.3, 0.9, rng)
        real = channel.draw_channels(topo, channel.COST207_TU6, 16, rng)
        stack = channel.matrix_stack(real, 3)
        h = stack[0, 0][:, 0]
        sigma_v = 0.05
        s = rng.choice([-1.0, 1.0], size=(3, 1, 20000))
        t = s + 1j * rng.standard_normal((3, 1, 20000))
        x = airlink.uplink_batch(topo, stack, 0, t, sigma_v, rng)
        mf = harness.block_sinr(combine.mf_weights(h), x, s[0, 0])
        mmse = harness.block_sinr(
            combine.mmse_weights(stack[:, 0], topo.gains_at(0), 0, sigma_v, 2.0)[0],
            x,
            s[0, 0],
        )
        assert mmse >= mf - 0.1


def test_measure_sinr_exact_construction():
    # residual orthogonal to the symbols by construction: the fitted gain
    # equals the true gain and the SINR is exact
    n = 1000
    g, sigma = 1.7, 0.35
    s = np.tile([1.0, -1.0, 1.0, -1.0], n // 4)
    e = np.tile([sigma, sigma, -sigma, -sigma], n // 4)
    assert abs(np.dot(e, s)) < 1e-12
    x = (g * s + e).astype(complex).reshape(-1, 1)

    report = combine.measure_sinr(np.array([1.0 + 0j]), harness._replay(x, s), n)
    expected = 10 * np.log10(g * g * np.mean(s * s) / sigma**2)
    assert report.sinr_db == pytest.approx(expected, abs=1e-10)
    assert report.signal_gain == pytest.approx(g, abs=1e-12)
    assert report.residual_power == pytest.approx(sigma**2, abs=1e-12)
    assert report.num_symbols == n


def test_measure_sinr_sentinels():
    n = 1000
    s = np.tile([1.0, -1.0], n // 2)
    clean = (2.0 * s).astype(complex).reshape(-1, 1)
    report = combine.measure_sinr(np.array([1.0 + 0j]), harness._replay(clean, s), n)
    assert report.sinr_db == np.inf

    e = np.tile([1.0, 1.0, -1.0, -1.0], n // 4)
    orthogonal = e.astype(complex).reshape(-1, 1)
    report = combine.measure_sinr(
        np.array([1.0 + 0j]), harness._replay(orthogonal, s), n
    )
    assert report.sinr_db == -np.inf
    assert report.signal_gain == 0.0


def test_measure_sinr_scale_invariance():
    rng = np.random.default_rng(5)
    n = 2000
    h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    s = rng.choice([-1.0, 1.0], size=n)
    x = np.outer(s, h) + 0.3 * (
        rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))
    )
    a = combine.measure_sinr(h, harness._replay(x, s), n).sinr_db
    b = combine.measure_sinr(-3.7 * h, harness._replay(x, s), n).sinr_db
    assert a == pytest.approx(b, abs=1e-9)


def test_measure_sinr_rejects_short_blocks():
    s = np.ones(10)
    x = np.ones((10, 1), dtype=complex)
    with pytest.raises(ValueError):
        combine.measure_sinr(np.array([1.0 + 0j]), harness._replay(x, s), 10)


def test_gain_normalizer_validation():
    with pytest.raises(ValueError):
        combine.GainNormalizer(d=np.array([1.0, 0.0]))

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tracking kernel: the sequential tap-weight recursion.

Must stay semantically identical to ``_kernel_py.track_segment``; the
backends are cross-checked by tests on identical inputs.
"""

from libc.math cimport fabs


def track_segment(
    double complex[::1] w,
    double complex[:, ::1] x_packet,
    double[::1] x_norm_sq,
    Py_ssize_t start,
    Py_ssize_t count,
    double mu,
    double eps,
    double r,
    bint normalized,
    double[::1] s_out = None,
):
    """Run ``count`` tap-weight updates in place, cycling over the packet.

    Update i uses packet row (start + i) % P:

        y   = Re{w^H x}
        eta = 2 mu / (x^H x + eps)   (or 2 mu unnormalized)
        w  -= eta * sign(y) * (|y| - r) * x

    ``s_out``, when given, receives the pre-update decisions y.
    """
    cdef Py_ssize_t packet_len = x_packet.shape[0]
    cdef Py_ssize_t n_taps = w.shape[0]
    cdef double two_mu = 2.0 * mu
    cdef Py_ssize_t i, a, k
    cdef double y, eta, sign, coef
    cdef double complex acc
    cdef bint want_s = s_out is not None

    for i in range(count):
        k = (start + i) % packet_len
        acc = 0
        for a in range(n_taps):
            acc = acc + w[a].conjugate() * x_packet[k, a]
        y = acc.real
        if want_s:
            s_out[i] = y
        eta = two_mu / (x_norm_sq[k] + eps) if normalized else two_mu
        sign = 1.0 if y > 0.0 else (-1.0 if y < 0.0 else 0.0)
        coef = eta * sign * (fabs(y) - r)
        if coef != 0.0:
            for a in range(n_taps):
                w[a] = w[a] - coef * x_packet[k, a]

"""Numba-accelerated separated-pair loops (hot path of assembly).

Row blocks are written by independent iterations of a parallel loop, so
results are independent of the thread count.  The scalar Hankel
evaluation mirrors `hankel` exactly (same constants, same branches).
"""

import math

import numba
import numpy as np
from numba import njit, prange

from .hankel import (_D0_CHEB, _D1_CHEB, _M0_CHEB, _M1_CHEB, _WHI, _WLO,
                     _XHI, _XLO, _asymptotic_sum, _series_j0y0, _series_j1y1)

_j0y0 = njit(cache=True)(_series_j0y0)
_j1y1 = njit(cache=True)(_series_j1y1)
_asym = njit(cache=True)(_asymptotic_sum)


@njit(cache=True)
def _clenshaw(coef, s):
    b1 = 0.0
    b2 = 0.0
    for kk in range(len(coef) - 1, 0, -1):
        b1, b2 = 2.0 * s * b1 - b2 + coef[kk], b1
    return s * b1 - b2 + coef[0]


@njit(cache=True)
def _h01(x):
    if x <= _XLO:
        j0, y0 = _j0y0(x)
        j1, y1 = _j1y1(x)
        return complex(j0, y0), complex(j1, y1)
    env = math.sqrt(2.0 / (math.pi * x))
    if x < _XHI:
        s = (2.0 / x - (_WLO + _WHI)) / (_WHI - _WLO)
        m0 = env * _clenshaw(_M0_CHEB, s)
        m1 = env * _clenshaw(_M1_CHEB, s)
        th0 = x - 0.25 * math.pi + _clenshaw(_D0_CHEB, s) / x
        th1 = x - 0.75 * math.pi + _clenshaw(_D1_CHEB, s) / x
        return (complex(m0 * math.cos(th0), m0 * math.sin(th0)),
                complex(m1 * math.cos(th1), m1 * math.sin(th1)))
    re0, im0 = _asym(0.0, x)
    re1, im1 = _asym(1.0, x)
    c0 = math.cos(x - 0.25 * math.pi)
    s0 = math.sin(x - 0.25 * math.pi)
    c1 = math.cos(x - 0.75 * math.pi)
    s1 = math.sin(x - 0.75 * math.pi)
    h0 = complex(env * (c0 * re0 - s0 * im0), env * (s0 * re0 + c0 * im0))
    h1 = complex(env * (c1 * re1 - s1 * im1), env * (s1 * re1 + c1 * im1))
    return h0, h1


_TWO_PI = 2.0 * np.pi
_FOUR_PI = 4.0 * np.pi


@njit(cache=True, inline="always")
def _dot(u, v, d):
    s = 0.0
    for c in range(d):
        s += u[c] * v[c]
    return s


@njit(cache=True)
def _val_real(op, keq, a, x, y, nx, ny, zx, zy, d):
    r2 = 0.0
    for c in range(d):
        r2 += (x[c] - y[c]) * (x[c] - y[c])
    r = math.sqrt(r2)
    if op == 0:  # S
        if keq == 0:
            return math.log(a / r) / _TWO_PI
        return 1.0 / (_FOUR_PI * r)
    if keq == 0:
        g = 1.0 / (_TWO_PI * r2)
    else:
        g = 1.0 / (_FOUR_PI * r2 * r)
    acc = 0.0
    if op == 1:      # D
        for c in range(d):
            acc += (x[c] - y[c]) * ny[c]
    elif op == 2:    # D'
        for c in range(d):
            acc -= (x[c] - y[c]) * nx[c]
    elif op == 3:    # K_Z
        for c in range(d):
            acc += (x[c] - y[c]) * zy[c]
    elif op == 4:    # K_Z'
        for c in range(d):
            acc -= (x[c] - y[c]) * zx[c]
    else:            # Z . grad_Gamma S
        zn = _dot(zx, nx, d)
        for c in range(d):
            acc -= (x[c] - y[c]) * (zx[c] - zn * nx[c])
    return acc * g


@njit(cache=True)
def _val_cplx(op, keq, k, a, x, y, nx, ny, zx, zy, d):
    r2 = 0.0
    for c in range(d):
        r2 += (x[c] - y[c]) * (x[c] - y[c])
    r = math.sqrt(r2)
    if keq == 3:  # helmholtz d=3
        e = complex(math.cos(k * r), math.sin(k * r))
        if op == 0:
            return e / (_FOUR_PI * r)
        g = e * complex(1.0, -k * r) / (_FOUR_PI * r2 * r)
    else:         # helmholtz d=2
        h0, h1 = _h01(k * r)
        if op == 0:
            return 0.25j * h0
        g = 0.25j * k * h1 / r
    acc = 0.0
    if op == 1:
        for c in range(d):
            acc += (x[c] - y[c]) * ny[c]
    elif op == 2:
        for c in range(d):
            acc -= (x[c] - y[c]) * nx[c]
    elif op == 3:
        for c in range(d):
            acc += (x[c] - y[c]) * zy[c]
    elif op == 4:
        for c in range(d):
            acc -= (x[c] - y[c]) * zx[c]
    else:
        zn = _dot(zx, nx, d)
        for c in range(d):
            acc -= (x[c] - y[c]) * (zx[c] - zn * nx[c])
    return acc * g


@njit(cache=True, parallel=True)
def separated_matrix_real(A, op, keq, a, X, W, B, N, Z, TF, use_tf,
                          indptr, excl):
    ne, nq, d = X.shape
    nb = B.shape[1]
    for i in prange(ne):
        lo, hi = indptr[i], indptr[i + 1]
        for j in range(ne):
            skip = False
            for t in range(lo, hi):
                if excl[t] == j:
                    skip = True
                    break
            if skip:
                continue
            for qi in range(nq):
                wi = W[i, qi]
                if use_tf:
                    wi *= TF[i, qi]
                for qj in range(nq):
                    v = _val_real(op, keq, a, X[i, qi], X[j, qj],
                                  N[i], N[j], Z[i, qi], Z[j, qj], d)
                    w = wi * W[j, qj] * v
                    for bi in range(nb):
                        for bj in range(nb):
                            A[i * nb + bi, j * nb + bj] += \
                                w * B[qi, bi] * B[qj, bj]


@njit(cache=True, parallel=True)
def separated_matrix_cplx(A, op, keq, k, a, X, W, B, N, Z, TF, use_tf,
                          indptr, excl):
    ne, nq, d = X.shape
    nb = B.shape[1]
    for i in prange(ne):
        lo, hi = indptr[i], indptr[i + 1]
        for j in range(ne):
            skip = False
            for t in range(lo, hi):
                if excl[t] == j:
                    skip = True
                    break
            if skip:
                continue
            for qi in range(nq):
                wi = complex(W[i, qi], 0.0)
                if use_tf:
                    wi = wi * TF[i, qi]
                for qj in range(nq):
                    v = _val_cplx(op, keq, k, a, X[i, qi], X[j, qj],
                                  N[i], N[j], Z[i, qi], Z[j, qj], d)
                    w = wi * W[j, qj] * v
                    for bi in range(nb):
                        for bj in range(nb):
                            A[i * nb + bi, j * nb + bj] += \
                                w * B[qi, bi] * B[qj, bj]


@njit(cache=True, parallel=True)
def separated_load_real(out, op, keq, a, X, W, B, N, Z, TF, use_tf, F,
                        indptr, excl):
    ne, nq, d = X.shape
    nb = B.shape[1]
    for i in prange(ne):
        lo, hi = indptr[i], indptr[i + 1]
        for j in range(ne):
            skip = False
            for t in range(lo, hi):
                if excl[t] == j:
                    skip = True
                    break
            if skip:
                continue
            for qi in range(nq):
                wi = W[i, qi]
                if use_tf:
                    wi *= TF[i, qi]
                for qj in range(nq):
                    v = _val_real(op, keq, a, X[i, qi], X[j, qj],
                                  N[i], N[j], Z[i, qi], Z[j, qj], d)
                    w = wi * W[j, qj] * F[j, qj] * v
                    for bi in range(nb):
                        out[i * nb + bi] += w * B[qi, bi]


@njit(cache=True, parallel=True)
def separated_load_cplx(out, op, keq, k, a, X, W, B, N, Z, TF, use_tf, F,
                        indptr, excl):
    ne, nq, d = X.shape
    nb = B.shape[1]
    for i in prange(ne):
        lo, hi = indptr[i], indptr[i + 1]
        for j in range(ne):
            skip = False
            for t in range(lo, hi):
                if excl[t] == j:
                    skip = True
                    break
            if skip:
                continue
            for qi in range(nq):
                wi = complex(W[i, qi], 0.0)
                if use_tf:
                    wi = wi * TF[i, qi]
                for qj in range(nq):
                    v = _val_cplx(op, keq, k, a, X[i, qi], X[j, qj],
                                  N[i], N[j], Z[i, qi], Z[j, qj], d)
                    w = wi * W[j, qj] * F[j, qj] * v
                    for bi in range(nb):
                        out[i * nb + bi] += w * B[qi, bi]


def set_threads(n):
    numba.set_num_threads(max(1, int(n)))

"""Pure-numpy kernels for the O(N^2) separated-pair loops.

Semantically identical to the numba backend in `_pairs_numba`; selected
via the COERCIVE_BIE_BACKEND environment flag (see `backends`).
"""

import numpy as np

from .hankel import hankel1_01

OP_S, OP_D, OP_DPRIME, OP_KZ, OP_KZPRIME, OP_GRADSZ = range(6)
KEQ_LAPLACE2, KEQ_LAPLACE3, KEQ_HELMHOLTZ2, KEQ_HELMHOLTZ3 = range(4)

_TWO_PI = 2.0 * np.pi
_FOUR_PI = 4.0 * np.pi


def kernel_phi_grad(keq, a, k, r, need_phi, need_grad):
    """(phi(r), g(r)) with grad_y phi = (x - y) g(r); either may be None."""
    phi = grad = None
    if keq == KEQ_LAPLACE2:
        if need_phi:
            phi = np.log(a / r) / _TWO_PI
        if need_grad:
            grad = 1.0 / (_TWO_PI * r * r)
    elif keq == KEQ_LAPLACE3:
        if need_phi:
            phi = 1.0 / (_FOUR_PI * r)
        if need_grad:
            grad = 1.0 / (_FOUR_PI * r ** 3)
    elif keq == KEQ_HELMHOLTZ3:
        kr = k * r
        e = np.exp(1j * kr)
        if need_phi:
            phi = e / (_FOUR_PI * r)
        if need_grad:
            grad = e * (1.0 - 1j * kr) / (_FOUR_PI * r ** 3)
    else:
        h0, h1 = hankel1_01(k * r)
        if need_phi:
            phi = 0.25j * h0
        if need_grad:
            grad = 0.25j * k * h1 / r
    return phi, grad


def op_values(op, keq, a, k, x, y, nx, ny, zx, zy, guard=False):
    """Kernel of one operator at point pairs; inputs broadcast on the
    leading axes, last axis is the spatial dimension.

    `guard` replaces zero distances by 1 so that values at coincident
    nodes are finite garbage; callers must mask those pairs out (the
    separated-pair loop excludes them by construction).
    """
    diff = x - y
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    if guard:
        r = np.where(r == 0.0, 1.0, r)
    need_phi = op == OP_S
    phi, grad = kernel_phi_grad(keq, a, k, r, need_phi, not need_phi)
    if op == OP_S:
        return phi
    if op == OP_D:
        return np.sum(diff * ny, axis=-1) * grad
    if op == OP_DPRIME:
        return -np.sum(diff * nx, axis=-1) * grad
    if op == OP_KZ:
        return np.sum(diff * zy, axis=-1) * grad
    if op == OP_KZPRIME:
        return -np.sum(diff * zx, axis=-1) * grad
    if op == OP_GRADSZ:
        zt = zx - np.sum(zx * nx, axis=-1, keepdims=True) * nx
        return -np.sum(diff * zt, axis=-1) * grad
    raise ValueError(f"unknown op code {op}")


def op_values_both(op, keq, a, k, x, y, nx, ny, zx, zy):
    """(k(x, y), k(y, x)) sharing one distance/kernel evaluation."""
    diff = x - y
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    need_phi = op == OP_S
    phi, grad = kernel_phi_grad(keq, a, k, r, need_phi, not need_phi)
    if op == OP_S:
        return phi, phi
    dnx = np.sum(diff * nx, axis=-1)
    dny = np.sum(diff * ny, axis=-1)
    if op == OP_D:
        return dny * grad, -dnx * grad
    if op == OP_DPRIME:
        return -dnx * grad, dny * grad
    dzx = np.sum(diff * zx, axis=-1)
    dzy = np.sum(diff * zy, axis=-1)
    if op == OP_KZ:
        return dzy * grad, -dzx * grad
    if op == OP_KZPRIME:
        return -dzx * grad, dzy * grad
    if op == OP_GRADSZ:
        znx = np.sum(zx * nx, axis=-1)
        zny = np.sum(zy * ny, axis=-1)
        return (-(dzx - znx * dnx) * grad, (dzy - zny * dny) * grad)
    raise ValueError(f"unknown op code {op}")


def separated_matrix(A, op, keq, a, k, X, W, B, N, Z, TF, indptr, excl):
    """Accumulate all separated-pair blocks into A (modified in place).

    X (ne, nq, d) points, W (ne, nq) weights, B (nq, nb) basis values,
    N (ne, d) normals, Z (ne, nq, d) field values or None, TF (ne, nq)
    test-side factor or None.  excl[indptr[i]:indptr[i+1]] lists the
    elements (including i) whose pair with i is handled elsewhere.
    """
    ne, nq, d = X.shape
    nb = B.shape[1]
    A3 = A.reshape(ne, nb, ne, nb)
    for i in range(ne):
        xi = X[i]                       # (nq, d)
        nxi = np.broadcast_to(N[i], (nq, ne, nq, d))
        nyj = np.broadcast_to(N[None, :, None, :], (nq, ne, nq, d))
        zxi = None if Z is None else np.broadcast_to(
            Z[i][:, None, None, :], (nq, ne, nq, d))
        zyj = None if Z is None else np.broadcast_to(
            Z[None, :, :, :], (nq, ne, nq, d))
        vals = op_values(op, keq, a, k,
                         xi[:, None, None, :], X[None, :, :, :],
                         nxi, nyj, zxi, zyj, guard=True)
        wv = vals * W[i][:, None, None] * W[None, :, :]
        if TF is not None:
            wv = wv * TF[i][:, None, None]
        mask = np.ones(ne, dtype=bool)
        mask[excl[indptr[i]:indptr[i + 1]]] = False
        wv = wv * mask[None, :, None]
        A3[i] += np.einsum("pa,pjq,qb->ajb", B, wv, B)


def separated_load(out, op, keq, a, k, X, W, B, N, Z, TF, F, indptr, excl):
    """Accumulate <Op f, psi_i> over separated pairs; F (ne, nq) holds f
    at trial quadrature points."""
    ne, nq, d = X.shape
    nb = B.shape[1]
    o2 = out.reshape(ne, nb)
    for i in range(ne):
        xi = X[i]
        nxi = np.broadcast_to(N[i], (nq, ne, nq, d))
        nyj = np.broadcast_to(N[None, :, None, :], (nq, ne, nq, d))
        zxi = None if Z is None else np.broadcast_to(
            Z[i][:, None, None, :], (nq, ne, nq, d))
        zyj = None if Z is None else np.broadcast_to(
            Z[None, :, :, :], (nq, ne, nq, d))
        vals = op_values(op, keq, a, k,
                         xi[:, None, None, :], X[None, :, :, :],
                         nxi, nyj, zxi, zyj, guard=True)
        wv = vals * W[i][:, None, None] * (W * F)[None, :, :]
        if TF is not None:
            wv = wv * TF[i][:, None, None]
        mask = np.ones(ne, dtype=bool)
        mask[excl[indptr[i]:indptr[i + 1]]] = False
        wv = wv * mask[None, :, None]
        o2[i] += np.einsum("pa,pjq->a", B, wv)


def potential_values(kind, keq, a, k, targets, X, W, Z, density):
    """Layer potentials at off-boundary targets.

    kind: 0 single layer, 1 K_Z potential, 2 double layer.
    density (ne, nq) holds the density at trial quadrature points.
    Returns (nt,) values.
    """
    nt = targets.shape[0]
    dtype = complex if keq in (KEQ_HELMHOLTZ2, KEQ_HELMHOLTZ3) else float
    out = np.zeros(nt, dtype=dtype)
    diff = targets[:, None, None, :] - X[None, :, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    phi, grad = kernel_phi_grad(keq, a, k, r, kind == 0, kind != 0)
    if kind == 0:
        vals = phi
    else:
        vals = np.sum(diff * Z[None, :, :, :], axis=-1) * grad
    out += np.sum(vals * (W * density)[None, :, :], axis=(1, 2))
    return out

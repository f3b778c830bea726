"""Galerkin assembly of the boundary integral operators.

Operators: S, D, D', K_Z, K_Z', and Z . grad_Gamma S.  All six kernels
are linear in phi(r) or grad_y phi, so one evaluation path serves them:

    S        phi(r)
    D        (x - y) . n(y)  g(r)
    D'      -(x - y) . n(x)  g(r)
    K_Z      (x - y) . Z(y)  g(r)
    K_Z'    -(x - y) . Z(x)  g(r)
    Z.grS   -(x - y) . Z_t(x) g(r)     (tangential projection at x)

Separated pairs run through the selected backend (numba or numpy).
Touching pairs use the regularizing product rules from `quadrature`;
on flat panels the principal-value self terms of D and D' vanish
identically and the K-family self terms are evaluated through the
swap-symmetrized integrand

    [psi_i(x) psi_j(y) k(x,y) + psi_i(y) psi_j(x) k(y,x)] / 2,

whose singular odd part cancels exactly (symmetric-limit definition of
the PV integral) and whose remainder is weakly singular.

Unordered touching pairs are assembled once with both orientations
filled from the same nodes, which makes the discrete transpose
identity G(K_Z') = G(K_Z)^T exact.
"""

import numpy as np

from . import _pairs_numpy as pnp
from .backends import use_numba
from .discretization import Space, basis_values, mass_matrix
from .matrices import OperatorMatrix
from .quadrature import (ADJACENT, EDGE, SELF, VERTEX, gauss01, graded01,
                         pair_quadrature, triangle_rule)

OP_CODES = {"S": 0, "D": 1, "Dprime": 2, "KZ": 3, "KZprime": 4,
            "gradS_dot_Z": 5}
_K_FAMILY = ("KZ", "KZprime", "gradS_dot_Z")


class UnsupportedConfig(ValueError):
    """Requested configuration outside the implemented scope."""


def kernel_code(kernel):
    if kernel.equation == "laplace":
        return pnp.KEQ_LAPLACE2 if kernel.d == 2 else pnp.KEQ_LAPLACE3
    return pnp.KEQ_HELMHOLTZ2 if kernel.d == 2 else pnp.KEQ_HELMHOLTZ3


# ---------------------------------------------------------------------------
# pair classification


def classify_pairs(space):
    """Touching-pair lists and the separated-pair exclusion table."""
    key = "pairs"
    if key in space._cache:
        return space._cache[key]
    mesh = space.mesh
    ne = mesh.n_elements
    elems = mesh.elements
    vert_to_elems = {}
    for e in range(ne):
        for v in elems[e]:
            vert_to_elems.setdefault(int(v), []).append(e)
    touching = [set() for _ in range(ne)]
    for es in vert_to_elems.values():
        for a in es:
            for b in es:
                if a != b:
                    touching[a].add(b)
    adj = []       # d=2: (i, j, oi, oj) with shared corner first
    edge = []      # d=3: (i, j, oi, oj) with shared edge first (consistent)
    vertex = []    # d=3: (i, j, oi, oj) with shared vertex first
    for i in range(ne):
        for j in sorted(touching[i]):
            if j <= i:
                continue
            shared = sorted(set(elems[i]) & set(elems[j]))
            if mesh.d == 2:
                s = shared[0]
                oi = (0, 1) if elems[i][0] == s else (1, 0)
                oj = (0, 1) if elems[j][0] == s else (1, 0)
                adj.append((i, j, oi, oj))
            elif len(shared) == 2:
                v0, v1 = shared

                def order3(e):
                    loc = list(elems[e])
                    i0 = loc.index(v0)
                    i1 = loc.index(v1)
                    i2 = 3 - i0 - i1
                    return (i0, i1, i2)

                edge.append((i, j, order3(i), order3(j)))
            else:
                s = shared[0]

                def order1(e):
                    loc = list(elems[e])
                    i0 = loc.index(s)
                    rest = [c for c in range(3) if c != i0]
                    return (i0, rest[0], rest[1])

                vertex.append((i, j, order1(i), order1(j)))
    indptr = np.zeros(ne + 1, dtype=np.int64)
    excl = []
    for i in range(ne):
        row = sorted(touching[i] | {i})
        excl.extend(row)
        indptr[i + 1] = len(excl)
    out = {"adjacent": adj, "edge": edge, "vertex": vertex,
           "indptr": indptr, "excl": np.array(excl, dtype=np.int64)}
    space._cache[key] = out
    return out


# ---------------------------------------------------------------------------
# element-data preparation


def _field_at(field, pts, normals):
    if field is None:
        return np.zeros_like(pts)
    return field.evaluate(pts, normals=normals)


def _prepare_regular(space, field, test_factor, need_field):
    mesh = space.mesh
    X, W, B, _ = space.element_quadrature()
    N = mesh.normals
    if need_field:
        key = ("regZ", id(field))
        if key not in space._cache:
            normals_at = np.broadcast_to(N[:, None, :], X.shape)
            space._cache[key] = _field_at(
                field, X.reshape(-1, mesh.d),
                normals_at.reshape(-1, mesh.d)).reshape(X.shape)
        Z = space._cache[key]
    else:
        Z = np.zeros_like(X)
    TF = None
    if test_factor is not None:
        TF = np.asarray(test_factor(X.reshape(-1, mesh.d))).reshape(W.shape)
    return X, W, B, N, Z, TF


def _corner_coords(mesh, elem_ids, orders):
    """Reordered corner coordinates (npairs, d, d) and basis gather
    index (npairs, d): column l of the gather gives the position of the
    element's original corner l in the reordered frame."""
    corners = mesh.corners[elem_ids]  # (np, d, d)
    orders = np.asarray(orders, dtype=np.int64)
    reord = np.take_along_axis(corners, orders[:, :, None], axis=1)
    inv = np.argsort(orders, axis=1)
    return reord, inv


def _map_points(reord, params):
    """Affine map of reference params into physical coordinates.

    d=2: params (nn,) -> A0 + t (A1 - A0)
    d=3: params (nn, 2) -> A0 + u (A1 - A0) + v (A2 - A0)
    """
    if params.ndim == 1:
        return (reord[:, None, 0, :]
                + params[None, :, None] * (reord[:, 1] - reord[:, 0])[:, None, :])
    return (reord[:, None, 0, :]
            + params[None, :, 0, None] * (reord[:, 1] - reord[:, 0])[:, None, :]
            + params[None, :, 1, None] * (reord[:, 2] - reord[:, 0])[:, None, :])


def _basis_at(space, params, inv):
    """Basis values in the elements' own corner order: (npairs, nn, nb).

    The pair rules parametrize reordered corner frames; nodal basis
    functions are barycentric coordinates, so the element's own basis is
    recovered by permuting the barycentric components."""
    nn = params.shape[0]
    if space.p == 0:
        return np.ones((inv.shape[0], nn, 1))
    if space.d == 2:
        lam = np.stack([1.0 - params, params], axis=1)       # (nn, 2)
    else:
        lam = np.stack([1.0 - params[:, 0] - params[:, 1],
                        params[:, 0], params[:, 1]], axis=1)  # (nn, 3)
    return lam[:, inv].transpose(1, 0, 2)


def _op_vals(op, kernel, x, y, nx, ny, zx, zy):
    return pnp.op_values(OP_CODES[op], kernel_code(kernel), kernel.a,
                         kernel.k, x, y, nx, ny, zx, zy)


def _op_vals_both(op, kernel, x, y, nx, ny, zx, zy):
    return pnp.op_values_both(OP_CODES[op], kernel_code(kernel), kernel.a,
                              kernel.k, x, y, nx, ny, zx, zy)


def _pair_rule_for(space, pair_class):
    order = getattr(space, "singular_order", 0) or None
    return pair_quadrature(pair_class, order=order, d=space.d)


_LOG_TABLE_P0 = np.array([[-1.5]])
_LOG_TABLE_P1 = np.array([[-7 / 16, -5 / 16], [-5 / 16, -7 / 16]])
_BASIS_INTEGRALS_P0 = np.array([1.0])
_BASIS_INTEGRALS_P1 = np.array([0.5, 0.5])


def _self_log_analytic(space, kernel):
    """Exact d=2 Laplace single-layer self blocks on straight segments:

        (h^2 / 2 pi) [ log(a/h) I_a I_b - L_ab ],

    with L_ab the polynomial log moments over the unit square."""
    h = space.mesh.areas
    if space.p == 0:
        L, I = _LOG_TABLE_P0, _BASIS_INTEGRALS_P0
    else:
        L, I = _LOG_TABLE_P1, _BASIS_INTEGRALS_P1
    blocks = (h[:, None, None] ** 2 / (2.0 * np.pi)
              * (np.log(kernel.a / h)[:, None, None] * np.outer(I, I)[None]
                 - L[None]))
    return blocks


def _jacobian(mesh):
    return mesh.areas if mesh.d == 2 else 2.0 * mesh.areas


_CHUNK_NODES = 3_000_000


def _singular_chunks(space, pairs, pair_class):
    """Yield (ids_i, ids_j, X, Y, W, Bi, Bj) for batches of touching
    pairs sharing one reference rule, chunked to bound memory."""
    mesh = space.mesh
    rule = _pair_rule_for(space, pair_class)
    nn = len(rule.weights)
    if pair_class == SELF:
        ids = np.asarray(pairs, dtype=np.int64)
        orders = np.tile(np.arange(mesh.d), (len(ids), 1))
        ids_i = ids_j = ids
        orders_i = orders_j = orders
    else:
        ids_i = np.array([p[0] for p in pairs], dtype=np.int64)
        ids_j = np.array([p[1] for p in pairs], dtype=np.int64)
        orders_i = np.array([p[2] for p in pairs], dtype=np.int64)
        orders_j = np.array([p[3] for p in pairs], dtype=np.int64)
    jac = _jacobian(mesh)
    step = max(1, _CHUNK_NODES // nn)
    for lo in range(0, len(ids_i), step):
        sl = slice(lo, lo + step)
        ci, inv_i = _corner_coords(mesh, ids_i[sl], orders_i[sl])
        cj, inv_j = _corner_coords(mesh, ids_j[sl], orders_j[sl])
        X = _map_points(ci, rule.xhat)
        Y = _map_points(cj, rule.yhat)
        W = rule.weights[None, :] * (jac[ids_i[sl]] * jac[ids_j[sl]])[:, None]
        Bi = _basis_at(space, rule.xhat, inv_i)
        Bj = _basis_at(space, rule.yhat, inv_j)
        yield ids_i[sl], ids_j[sl], X, Y, W, Bi, Bj


def _scatter_blocks(A, nb, ids_i, ids_j, blocks):
    for n, (i, j) in enumerate(zip(ids_i, ids_j)):
        A[i * nb:(i + 1) * nb, j * nb:(j + 1) * nb] += blocks[n]


def _fill_singular_matrix(A, op, kernel, space, field, test_factor):
    mesh = space.mesh
    nb = space.nb
    pairs = classify_pairs(space)
    flat_normals = mesh.normals
    need_z = op in _K_FAMILY

    def field_at(pts, ids):
        if not need_z:
            return np.zeros_like(pts)
        nrm = np.broadcast_to(flat_normals[ids][:, None, :], pts.shape)
        return _field_at(field, pts.reshape(-1, mesh.d),
                         nrm.reshape(-1, mesh.d)).reshape(pts.shape)

    def tfac_at(pts):
        if test_factor is None:
            return 1.0
        return np.asarray(test_factor(pts.reshape(-1, mesh.d))) \
            .reshape(pts.shape[:-1])

    # --- self pairs
    ids = list(range(mesh.n_elements))
    if op in ("D", "Dprime"):
        pass  # flat-panel PV self terms vanish identically
    elif op == "S" and kernel.equation == "laplace" and mesh.d == 2 \
            and test_factor is None:
        blocks = _self_log_analytic(space, kernel)
        _scatter_blocks(A, nb, ids, ids, blocks)
    else:
        for ids_i, ids_j, X, Y, W, Bi, Bj in _singular_chunks(
                space, ids, SELF):
            nx = flat_normals[ids_i][:, None, :]
            zx = field_at(X, ids_i)
            zy = field_at(Y, ids_j)
            if op in _K_FAMILY:
                kxy, kyx = _op_vals_both(op, kernel, X, Y, nx, nx, zx, zy)
                term = 0.5 * (
                    np.einsum("pn,pna,pnb->pab", W * kxy * tfac_at(X), Bi, Bj)
                    + np.einsum("pn,pna,pnb->pab",
                                W * kyx * tfac_at(Y), Bj, Bi))
            else:
                kxy = _op_vals(op, kernel, X, Y, nx, nx, zx, zy)
                term = np.einsum("pn,pna,pnb->pab",
                                 W * kxy * tfac_at(X), Bi, Bj)
            _scatter_blocks(A, nb, ids_i, ids_j, term)

    # --- touching (non-self) pairs: fill both orientations from one rule
    for name, plist in (("adjacent", pairs["adjacent"]),
                        ("edge", pairs["edge"]),
                        ("vertex", pairs["vertex"])):
        if not plist:
            continue
        pair_class = {"adjacent": ADJACENT, "edge": EDGE,
                      "vertex": VERTEX}[name]
        for ids_i, ids_j, X, Y, W, Bi, Bj in _singular_chunks(
                space, plist, pair_class):
            nx = flat_normals[ids_i][:, None, :]
            ny = flat_normals[ids_j][:, None, :]
            zx = field_at(X, ids_i)
            zy = field_at(Y, ids_j)
            kxy, kyx = _op_vals_both(op, kernel, X, Y, nx, ny, zx, zy)
            bij = np.einsum("pn,pna,pnb->pab", W * kxy * tfac_at(X), Bi, Bj)
            bji = np.einsum("pn,pna,pnb->pab", W * kyx * tfac_at(Y), Bj, Bi)
            _scatter_blocks(A, nb, ids_i, ids_j, bij)
            _scatter_blocks(A, nb, ids_j, ids_i, bji)


def _check_assemble_args(op, kernel, space, field):
    if op not in OP_CODES:
        raise ValueError(f"unknown operator {op!r}")
    if kernel.d != space.d:
        raise ValueError("kernel dimension does not match the mesh")
    if op in _K_FAMILY and field is None:
        raise ValueError(f"operator {op} requires a vector field")
    if op in _K_FAMILY and space.d == 3 and space.p == 1:
        raise UnsupportedConfig(
            "K_Z-family assembly with p=1 in d=3 is not implemented; "
            "use p=0 (all built-in experiments) or d=2")


def assemble(op, kernel, space, field=None, test_factor=None):
    """Galerkin matrix (Op psi_j, psi_i)_{L2(Gamma)}.

    `test_factor`, when given, is a function of position multiplying the
    integrand on the test side (used for (Z.n) D' and eta S_k style
    compositions).
    """
    _check_assemble_args(op, kernel, space, field)
    dtype = complex if kernel.is_complex else float
    A = np.zeros((space.dim, space.dim), dtype=dtype)
    X, W, B, N, Z, TF = _prepare_regular(space, field, test_factor,
                                         op in _K_FAMILY)
    pairs = classify_pairs(space)
    code = OP_CODES[op]
    keq = kernel_code(kernel)
    if use_numba():
        from . import _pairs_numba as pnb
        if kernel.is_complex:
            TFc = (np.ascontiguousarray(TF, dtype=complex) if TF is not None
                   else np.zeros_like(W, dtype=complex))
            pnb.separated_matrix_cplx(A, code, keq, kernel.k, kernel.a,
                                      X, W, B, N, Z, TFc, TF is not None,
                                      pairs["indptr"], pairs["excl"])
        else:
            TFr = (np.ascontiguousarray(TF, dtype=float) if TF is not None
                   else np.zeros_like(W))
            pnb.separated_matrix_real(A, code, keq, kernel.a,
                                      X, W, B, N, Z, TFr, TF is not None,
                                      pairs["indptr"], pairs["excl"])
    else:
        pnp.separated_matrix(A, code, keq, kernel.a, kernel.k,
                             X, W, B, N, Z, TF,
                             pairs["indptr"], pairs["excl"])
    _fill_singular_matrix(A, op, kernel, space, field, test_factor)
    return OperatorMatrix(A, tag=op)


def apply_operator_load(op, kernel, space, f, field=None, test_factor=None):
    """Load vector <Op f, psi_i> for a smooth function f on Gamma.

    The operator is applied by quadrature against f directly; no
    projection of f onto the space is involved.
    """
    _check_assemble_args(op, kernel, space, field)
    mesh = space.mesh
    X, W, B, N, Z, TF = _prepare_regular(space, field, test_factor,
                                         op in _K_FAMILY)
    F = np.asarray(f(X.reshape(-1, mesh.d))).reshape(W.shape)
    dtype = complex if (kernel.is_complex or np.iscomplexobj(F)) else float
    out = np.zeros(space.dim, dtype=dtype)
    pairs = classify_pairs(space)
    code = OP_CODES[op]
    keq = kernel_code(kernel)
    if use_numba() and not (kernel.equation == "laplace"
                            and np.iscomplexobj(F)):
        from . import _pairs_numba as pnb
        if kernel.is_complex:
            TFc = (np.ascontiguousarray(TF, dtype=complex) if TF is not None
                   else np.zeros_like(W, dtype=complex))
            pnb.separated_load_cplx(out, code, keq, kernel.k, kernel.a, X, W,
                                    B, N, Z, TFc, TF is not None,
                                    np.ascontiguousarray(F, dtype=complex),
                                    pairs["indptr"], pairs["excl"])
        else:
            TFr = (np.ascontiguousarray(TF, dtype=float) if TF is not None
                   else np.zeros_like(W))
            pnb.separated_load_real(out, code, keq, kernel.a, X, W,
                                    B, N, Z, TFr, TF is not None,
                                    np.ascontiguousarray(F, dtype=float),
                                    pairs["indptr"], pairs["excl"])
    else:
        pnp.separated_load(out, code, keq, kernel.a, kernel.k,
                           X, W, B, N, Z, TF, F,
                           pairs["indptr"], pairs["excl"])
    _fill_singular_load(out, op, kernel, space, field, test_factor, f)
    return out


def _fill_singular_load(out, op, kernel, space, field, test_factor, f):
    mesh = space.mesh
    nb = space.nb
    pairs = classify_pairs(space)
    flat_normals = mesh.normals
    need_z = op in _K_FAMILY

    def field_at(pts, ids):
        if not need_z:
            return np.zeros_like(pts)
        nrm = np.broadcast_to(flat_normals[ids][:, None, :], pts.shape)
        return _field_at(field, pts.reshape(-1, mesh.d),
                         nrm.reshape(-1, mesh.d)).reshape(pts.shape)

    def tfac_at(pts):
        if test_factor is None:
            return 1.0
        return np.asarray(test_factor(pts.reshape(-1, mesh.d))) \
            .reshape(pts.shape[:-1])

    def f_at(pts):
        return np.asarray(f(pts.reshape(-1, mesh.d))).reshape(pts.shape[:-1])

    o2 = out.reshape(mesh.n_elements, nb)

    ids = list(range(mesh.n_elements))
    if op not in ("D", "Dprime"):
        for ids_i, ids_j, X, Y, W, Bi, Bj in _singular_chunks(
                space, ids, SELF):
            nx = flat_normals[ids_i][:, None, :]
            zx = field_at(X, ids_i)
            zy = field_at(Y, ids_j)
            if op in _K_FAMILY:
                kxy, kyx = _op_vals_both(op, kernel, X, Y, nx, nx, zx, zy)
                vals = 0.5 * (np.einsum("pn,pna->pa",
                                        W * kxy * tfac_at(X) * f_at(Y), Bi)
                              + np.einsum("pn,pna->pa",
                                          W * kyx * tfac_at(Y) * f_at(X), Bj))
            else:
                kxy = _op_vals(op, kernel, X, Y, nx, nx, zx, zy)
                vals = np.einsum("pn,pna->pa",
                                 W * kxy * tfac_at(X) * f_at(Y), Bi)
            np.add.at(o2, ids_i, vals)

    for name, plist in (("adjacent", pairs["adjacent"]),
                        ("edge", pairs["edge"]),
                        ("vertex", pairs["vertex"])):
        if not plist:
            continue
        pair_class = {"adjacent": ADJACENT, "edge": EDGE,
                      "vertex": VERTEX}[name]
        for ids_i, ids_j, X, Y, W, Bi, Bj in _singular_chunks(
                space, plist, pair_class):
            nx = flat_normals[ids_i][:, None, :]
            ny = flat_normals[ids_j][:, None, :]
            zx = field_at(X, ids_i)
            zy = field_at(Y, ids_j)
            kxy, kyx = _op_vals_both(op, kernel, X, Y, nx, ny, zx, zy)
            li = np.einsum("pn,pna->pa", W * kxy * tfac_at(X) * f_at(Y), Bi)
            lj = np.einsum("pn,pna->pa", W * kyx * tfac_at(Y) * f_at(X), Bj)
            np.add.at(o2, ids_i, li)
            np.add.at(o2, ids_j, lj)


# ---------------------------------------------------------------------------
# projections


def projection_matrices(space):
    """Galerkin matrices of the mean-value projection P and Q = I - P.

    P is rank one: (P)_ij = (psi_j, 1)(1, psi_i) / |Gamma|."""
    M = mass_matrix(space).data
    e = np.ones(space.dim)
    m = M @ e
    area = float(e @ m)
    P = np.outer(m, m) / area
    return OperatorMatrix(P, tag="P"), OperatorMatrix(M - P, tag="Q")


# ---------------------------------------------------------------------------
# potentials


class PotentialField:
    """Off-boundary field of a layer potential with a discrete density.

    kind: 'single' (S), 'KZ' (the K_Z potential), or 'double' (K_n)."""

    def __init__(self, kernel, space, coeffs, kind="single", field=None):
        if kind not in ("single", "KZ", "double"):
            raise ValueError(f"unknown potential kind {kind!r}")
        if kind == "KZ" and field is None:
            raise ValueError("KZ potential requires a vector field")
        self.kernel = kernel
        self.space = space
        self.coeffs = np.asarray(coeffs)
        self.kind = kind
        self.field = field

    def density_at_quadrature(self):
        X, W, B, _ = self.space.element_quadrature()
        c = self.coeffs.reshape(self.space.mesh.n_elements, self.space.nb)
        return np.einsum("eb,qb->eq", c, B)

    def __call__(self, points, check_distance=True):
        return eval_potential(self, points, check_distance=check_distance)


def eval_potential(potential, points, check_distance=True):
    """Evaluate a layer potential at off-boundary points."""
    space = potential.space
    mesh = space.mesh
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    X, W, B, _ = space.element_quadrature()
    if check_distance:
        d2 = np.min(np.sum((pts[:, None, :] - mesh.centroids[None, :, :]) ** 2,
                           axis=2), axis=1)
        if np.any(np.sqrt(d2) < 0.5 * mesh.h_min):
            raise ValueError(
                "potential evaluation point too close to the boundary; "
                "pass check_distance=False to override")
    dens = potential.density_at_quadrature()
    kind = 0 if potential.kind == "single" else 1
    if potential.kind == "double":
        Z = np.broadcast_to(mesh.normals[:, None, :], X.shape)
    elif potential.kind == "KZ":
        nrm = np.broadcast_to(mesh.normals[:, None, :], X.shape)
        Z = potential.field.evaluate(X.reshape(-1, mesh.d),
                                     normals=nrm.reshape(-1, mesh.d)) \
            .reshape(X.shape)
    else:
        Z = X
    return pnp.potential_values(kind, kernel_code(potential.kernel),
                                potential.kernel.a, potential.kernel.k,
                                pts, X, W, Z, dens)


def potential_of_function(kernel, space, f, kind="single", field=None,
                          points=None):
    """Layer potential of a *function* density (quadrature sampled)."""
    mesh = space.mesh
    X, W, _, _ = space.element_quadrature()
    dens = np.asarray(f(X.reshape(-1, mesh.d))).reshape(W.shape)
    kind_code = 0 if kind == "single" else 1
    if kind == "double":
        Z = np.broadcast_to(mesh.normals[:, None, :], X.shape).copy()
    elif kind == "KZ":
        nrm = np.broadcast_to(mesh.normals[:, None, :], X.shape)
        Z = field.evaluate(X.reshape(-1, mesh.d),
                           normals=nrm.reshape(-1, mesh.d)).reshape(X.shape)
    else:
        Z = X
    pts = np.asarray(points, dtype=float)
    return pnp.potential_values(kind_code, kernel_code(kernel), kernel.a,
                                kernel.k, pts, X, W, Z, dens)


# ---------------------------------------------------------------------------
# pointwise boundary evaluation (needed by the weak hypersingular form)


def _segment_rule_for_target(tstar, q=10, levels=12, sigma=0.25):
    """1-d rule on [0,1] graded toward an interior parameter tstar."""
    gx, gw = graded01(q, levels, sigma)
    xs, ws = [], []
    if tstar > 1e-14:
        xs.append(tstar - tstar * gx)
        ws.append(tstar * gw)
    if tstar < 1.0 - 1e-14:
        span = 1.0 - tstar
        xs.append(tstar + span * gx)
        ws.append(span * gw)
    return np.concatenate(xs), np.concatenate(ws)


def hypersingular_load(kernel, g, space, test_weight=None):
    """Weak hypersingular data <w H g, psi_i> by tangential reduction.

    d=2: <H g, v> = <S g', v'> - k^2 <tau . S(tau g), v> in arc length,
    with panelwise-constant test weights w entering through v = w psi
    (jump terms at panel endpoints carry the basis discontinuities).
    d=3: surface-curl form with test-side edge line integrals; needs
    p = 1 (use the indirect formulations for p = 0 data in 3-d).

    `g` must provide .value(points) and .gradient(points) (ambient).
    """
    if space.d == 2:
        return _hypersingular_load_2d(kernel, g, space, test_weight)
    if space.p == 0:
        raise UnsupportedConfig(
            "weak hypersingular data with p=0 test functions is not "
            "available in d=3; use p=1 or an indirect formulation")
    return _hypersingular_load_3d(kernel, g, space, test_weight)


def _tangents(mesh):
    corners = mesh.corners
    t = corners[:, 1] - corners[:, 0]
    return t / np.linalg.norm(t, axis=1)[:, None]


def _hypersingular_load_2d(kernel, g, space, test_weight):
    mesh = space.mesh
    ne = mesh.n_elements
    w = np.ones(ne) if test_weight is None else np.asarray(test_weight)
    tau = _tangents(mesh)
    corners = mesh.corners
    endpoints_a = corners[:, 0]
    endpoints_b = corners[:, 1]

    # S g' evaluated at panel endpoints and quadrature nodes.  The
    # source tangent is elementwise constant, so the density callback
    # reads the current source element from shared state.
    state = {}

    def density(pts):
        e = state["elem"]
        return np.asarray(g.gradient(pts)) @ tau[e]

    X, Wq, B, ref = space.element_quadrature()
    targets = np.concatenate([endpoints_a, endpoints_b,
                              X.reshape(-1, mesh.d)], axis=0)
    sgp = _single_layer_per_element_density(kernel, mesh, density, state,
                                            targets)
    sgp_a = sgp[:ne]
    sgp_b = sgp[ne:2 * ne]
    sgp_q = sgp[2 * ne:].reshape(X.shape[:2])

    nb = space.nb
    out = np.zeros(space.dim, dtype=complex)
    o2 = out.reshape(ne, nb)
    if space.p == 0:
        o2[:, 0] += w * (sgp_a - sgp_b)
    else:
        # basis {1-t, t}: (w psi0)' = w (delta_a - 1/h within the panel),
        # (w psi1)' = w (-delta_b + 1/h within the panel)
        inner = np.einsum("eq,eq->e", Wq, sgp_q) / mesh.areas
        o2[:, 0] += w * (sgp_a - inner)
        o2[:, 1] += w * (-sgp_b + inner)

    if kernel.equation == "helmholtz":
        # -k^2 <tau(x) . S_k(tau g), w psi>
        def vec_density(pts):
            e = state["elem"]
            return np.asarray(g.value(pts))[:, None] * tau[e][None, :]

        sv = _single_layer_per_element_density(kernel, mesh, vec_density,
                                               state, X.reshape(-1, mesh.d))
        sv = sv.reshape(X.shape)
        ttau = np.broadcast_to(tau[:, None, :], X.shape)
        proj = np.sum(sv * ttau, axis=2)
        o2 -= kernel.k ** 2 * np.einsum(
            "eq,qb->eb", Wq * proj * w[:, None], B)
    return out if kernel.is_complex else np.real(out)


def _single_layer_per_element_density(kernel, mesh, density, state, targets):
    """S applied to a density whose definition depends on the source
    element (state['elem'] is set before sampling)."""
    targets = np.asarray(targets, dtype=float)
    corners = mesh.corners
    a = corners[:, 0]
    b = corners[:, 1]
    h = mesh.areas
    gx, gw = gauss01(10)
    from .kernels import phi_r
    probe_e = 0
    state["elem"] = probe_e
    probe = np.asarray(density(a[:1]))
    vec = probe.ndim == 2
    width = probe.shape[-1] if vec else 1
    out = np.zeros((len(targets), width), dtype=complex)
    for e in range(mesh.n_elements):
        state["elem"] = e
        ax = targets - a[e][None, :]
        tproj = np.clip(ax @ (b[e] - a[e]) / h[e] ** 2, 0.0, 1.0)
        nearest = a[e][None, :] + tproj[:, None] * (b[e] - a[e])[None, :]
        dist = np.linalg.norm(targets - nearest, axis=1)
        near = dist <= 1.5 * h[e]
        # far targets: one shared Gauss rule
        y = a[e][None, :] + gx[:, None] * (b[e] - a[e])[None, :]
        vals = np.asarray(density(y))
        if not vec:
            vals = vals[:, None]
        far_idx = np.nonzero(~near)[0]
        if len(far_idx):
            r = np.linalg.norm(targets[far_idx][:, None, :] - y[None, :, :],
                               axis=2)
            out[far_idx] += np.einsum("tn,n,nj->tj", phi_r(kernel, r),
                                      gw * h[e], vals)
        for it in np.nonzero(near)[0]:
            t, wq = _segment_rule_for_target(tproj[it])
            yy = a[e][None, :] + t[:, None] * (b[e] - a[e])[None, :]
            r = np.linalg.norm(targets[it][None, :] - yy, axis=1)
            r = np.maximum(r, 1e-300)
            vv = np.asarray(density(yy))
            if not vec:
                vv = vv[:, None]
            out[it] += np.einsum("n,n,nj->j", phi_r(kernel, r), wq * h[e], vv)
    return out if vec else out[:, 0]


def _hypersingular_load_3d(kernel, g, space, test_weight):
    mesh = space.mesh
    ne = mesh.n_elements
    w = np.ones(ne) if test_weight is None else np.asarray(test_weight)
    normals = mesh.normals
    corners = mesh.corners

    def curl_g(pts, elem):
        grad = np.asarray(g.gradient(pts))
        n = normals[elem]
        gt = grad - np.outer(grad @ n, n)
        return np.cross(np.broadcast_to(n, gt.shape), gt)

    state = {}

    def density(pts):
        return curl_g(pts, state["elem"])

    # targets: triangle quadrature nodes and edge-rule nodes
    X, Wq, B, ref = space.element_quadrature()
    qe = 8
    ge, we = gauss01(qe)
    edge_pts = []
    for loc in ((0, 1), (1, 2), (2, 0)):
        pa = corners[:, loc[0]]
        pb = corners[:, loc[1]]
        edge_pts.append(pa[:, None, :]
                        + ge[None, :, None] * (pb - pa)[:, None, :])
    edge_pts = np.stack(edge_pts, axis=1)  # (ne, 3, qe, 3)
    targets = np.concatenate([X.reshape(-1, 3),
                              edge_pts.reshape(-1, 3)], axis=0)
    C = _single_layer_surface3(kernel, space, density, state, targets)
    nquad = X.shape[0] * X.shape[1]
    Cq = C[:nquad].reshape(X.shape[0], X.shape[1], 3)
    Ce = C[nquad:].reshape(ne, 3, qe, 3)

    out = np.zeros(space.dim, dtype=complex)
    o2 = out.reshape(ne, space.nb)
    # in-element part: grad of nodal p=1 basis is constant per element
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    for e in range(ne):
        n = normals[e]
        # gradients of barycentric basis within the panel plane
        T = np.stack([e1[e], e2[e], n], axis=1)
        Tinv = np.linalg.inv(T)
        grads = np.stack([-Tinv[0] - Tinv[1], Tinv[0], Tinv[1]])
        for bidx in range(3):
            cb = np.cross(n, grads[bidx])
            o2[e, bidx] += w[e] * np.einsum("q,qj,j->", Wq[e],
                                            Cq[e], cb)
        # edge jump terms: - sum_edges int psi (n x nu) . C dl
        locpairs = ((0, 1), (1, 2), (2, 0))
        lam_on_edges = {
            (0, 1): np.stack([1.0 - ge, ge, np.zeros(qe)], axis=1),
            (1, 2): np.stack([np.zeros(qe), 1.0 - ge, ge], axis=1),
            (2, 0): np.stack([ge, np.zeros(qe), 1.0 - ge], axis=1),
        }
        for le, loc in enumerate(locpairs):
            pa = corners[e, loc[0]]
            pb = corners[e, loc[1]]
            edge = pb - pa
            elen = np.linalg.norm(edge)
            tvec = edge / elen
            nu = np.cross(tvec, n)
            centroid = corners[e].mean(axis=0)
            if np.dot(nu, (pa + pb) / 2 - centroid) < 0:
                nu = -nu
            nxnu = np.cross(n, nu)
            lam = lam_on_edges[loc]
            for bidx in range(3):
                psi = lam[:, bidx]
                o2[e, bidx] -= w[e] * elen * np.einsum(
                    "q,q,qj,j->", we, psi, Ce[e, le], nxnu)

    if kernel.equation == "helmholtz":
        def scal_density(pts):
            return np.asarray(g.value(pts))

        S = _single_layer_surface3(kernel, space, scal_density, state,
                                   X.reshape(-1, 3), scalar=True)
        Sq = S.reshape(X.shape[:2])
        ndot = normals @ normals.T  # careful: need n(x).n(y) inside; fold
        # n(x) . S(n g): evaluate vector density n(y) g(y)
        def nvec_density(pts):
            return (np.asarray(g.value(pts))[:, None]
                    * normals[state["elem"]][None, :])

        Snj = _single_layer_surface3(kernel, space, nvec_density, state,
                                     X.reshape(-1, 3))
        Snj = Snj.reshape(X.shape[0], X.shape[1], 3)
        proj = np.einsum("eqj,ej->eq", Snj, normals)
        o2 -= kernel.k ** 2 * np.einsum("eq,qb->eb",
                                        Wq * proj * w[:, None], B)
    return out if kernel.is_complex else np.real(out)


def _duffy_point_rule(q=10):
    gx, gw = gauss01(q)
    u = np.repeat(gx, q)
    v = np.tile(gx, q)
    w = np.repeat(gw, q) * np.tile(gw, q)
    return u, v, w


def _single_layer_surface3(kernel, space, density, state, targets,
                           scalar=False):
    """S applied to an element-dependent (vector) density, evaluated at
    points on the surface; near elements use a point-Duffy split."""
    from .kernels import phi_r
    mesh = space.mesh
    targets = np.asarray(targets, dtype=float)
    corners = mesh.corners
    uv, wtri = triangle_rule(7)
    du, dv, dw = _duffy_point_rule(10)
    width = 1 if scalar else 3
    out = np.zeros((len(targets), width), dtype=complex)
    jac = 2.0 * mesh.areas
    for e in range(mesh.n_elements):
        state["elem"] = e
        A, Bc, Cc = corners[e]
        ee1, ee2 = Bc - A, Cc - A
        n = mesh.normals[e]
        y_far = A[None, :] + np.outer(uv[:, 0], ee1) + np.outer(uv[:, 1], ee2)
        vals_far = np.asarray(density(y_far))
        if scalar:
            vals_far = vals_far[:, None]
        rel = targets - A[None, :]
        # barycentric coordinates of the in-plane projection
        M = np.stack([ee1, ee2], axis=1)
        G = M.T @ M
        Ginv = np.linalg.inv(G)
        ab = rel @ M @ Ginv.T
        height = np.abs(rel @ n)
        inplane_dist = _simplex_distance(ab) * np.sqrt(
            max(np.linalg.eigvalsh(G)[0], 1e-300))
        dist = np.hypot(height, np.maximum(inplane_dist, 0.0))
        near = dist <= 0.8 * mesh.diameters[e]
        far_idx = np.nonzero(~near)[0]
        if len(far_idx):
            r = np.linalg.norm(targets[far_idx][:, None, :]
                               - y_far[None, :, :], axis=2)
            out[far_idx] += np.einsum("tn,n,nj->tj", phi_r(kernel, r),
                                      wtri * jac[e], vals_far)
        for it in np.nonzero(near)[0]:
            a0 = min(max(ab[it, 0], 0.0), 1.0)
            b0 = min(max(ab[it, 1], 0.0), 1.0 - a0)
            p = A + a0 * ee1 + b0 * ee2
            vv = np.array([A, Bc, Cc])
            acc = np.zeros(width, dtype=complex)
            for s in range(3):
                Va, Vb = vv[s], vv[(s + 1) % 3]
                two_area = np.linalg.norm(np.cross(Va - p, Vb - p))
                if two_area < 1e-14 * jac[e]:
                    continue
                y = (p[None, :] + np.outer(du, Va - p)
                     + np.outer(du * dv, Vb - Va))
                r = np.linalg.norm(targets[it][None, :] - y, axis=1)
                r = np.maximum(r, 1e-300)
                vals = np.asarray(density(y))
                if scalar:
                    vals = vals[:, None]
                acc += np.einsum("n,n,nj->j", phi_r(kernel, r),
                                 dw * du * two_area, vals)
            out[it] += acc
    return out if not scalar else out[:, 0]


def _simplex_distance(ab):
    """Distance from barycentric points to the unit simplex (in
    reference coordinates, crude but only used to pick near targets)."""
    a = ab[:, 0]
    b = ab[:, 1]
    da = np.maximum(-a, 0.0)
    db = np.maximum(-b, 0.0)
    ds = np.maximum(a + b - 1.0, 0.0) / np.sqrt(2.0)
    return np.sqrt(da ** 2 + db ** 2) + ds

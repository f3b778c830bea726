"""Boundary element spaces of discontinuous piecewise polynomials.

Degrees p in {0, 1}; every basis function is supported on exactly one
element, so the mass matrix is block diagonal with one small block per
element.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import Mesh
from .matrices import OperatorMatrix
from .quadrature import gauss01, pair_quadrature, triangle_rule

AREA = "area"
OPERATOR_DIAGONAL = "operator_diagonal"
IDENTITY = "identity"


def basis_values(d, p, params):
    """Reference basis values.

    d=2: params (n,) in [0,1];      p=0 -> [1], p=1 -> [1-t, t]
    d=3: params (n,2) simplex uv;   p=0 -> [1], p=1 -> [1-u-v, u, v]
    """
    params = np.asarray(params, dtype=float)
    if d == 2:
        t = params
        if p == 0:
            return np.ones((len(t), 1))
        return np.stack([1.0 - t, t], axis=1)
    u, v = params[:, 0], params[:, 1]
    if p == 0:
        return np.ones((len(u), 1))
    return np.stack([1.0 - u - v, u, v], axis=1)


def _reference_mass_block(d, p):
    # scaled so that jac * block is the physical block, with jac = h
    # (d=2) or 2 |T| (d=3)
    if p == 0:
        return np.array([[1.0 if d == 2 else 0.5]])
    if d == 2:
        return np.array([[1 / 3, 1 / 6], [1 / 6, 1 / 3]])
    return np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 24.0


@dataclass(frozen=True, eq=False)
class Space:
    """S^p_G: discontinuous piecewise polynomials of degree p on a mesh."""

    mesh: Mesh
    p: int
    regular_order: int = 0  # 0 -> dimension default (4 for d=2, 6-pt d=3)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.p not in (0, 1):
            raise ValueError("only p = 0 and p = 1 are supported")

    @property
    def d(self):
        return self.mesh.d

    @property
    def nb(self):
        """Basis functions per element."""
        return 1 if self.p == 0 else self.d

    @property
    def dim(self):
        return self.mesh.n_elements * self.nb

    def element_of_dof(self, i):
        return i // self.nb

    def quad_rule(self):
        """Reference rule used for regular per-element integrals."""
        if self.d == 2:
            q = self.regular_order or 4
            t, w = gauss01(q)
            return t, w
        if self.regular_order:
            return triangle_rule(("duffy", self.regular_order))
        return triangle_rule(6)

    def element_quadrature(self):
        """(points (ne, nq, d), weights (ne, nq), basis (nq, nb),
        reference params).  Weights include the surface Jacobian."""
        key = "elem_quad"
        if key in self._cache:
            return self._cache[key]
        mesh = self.mesh
        corners = mesh.corners
        if self.d == 2:
            t, w = self.quad_rule()
            pts = corners[:, None, 0, :] \
                + t[None, :, None] * (corners[:, 1] - corners[:, 0])[:, None, :]
            wts = mesh.areas[:, None] * w[None, :]
            ref = t
        else:
            uv, w = self.quad_rule()
            e1 = corners[:, 1] - corners[:, 0]
            e2 = corners[:, 2] - corners[:, 0]
            pts = (corners[:, None, 0, :]
                   + uv[None, :, 0, None] * e1[:, None, :]
                   + uv[None, :, 1, None] * e2[:, None, :])
            wts = (2.0 * mesh.areas)[:, None] * w[None, :]
            ref = uv
        bas = basis_values(self.d, self.p, ref)
        out = (pts, wts, bas, ref)
        self._cache[key] = out
        return out


def build_space(mesh, p, regular_order=0):
    return Space(mesh, p, regular_order)


def mass_matrix(space):
    """Block-diagonal Galerkin mass matrix (M)_ij = (psi_j, psi_i)."""
    mesh = space.mesh
    nb = space.nb
    block = _reference_mass_block(space.d, space.p)
    jac = mesh.areas if space.d == 2 else 2.0 * mesh.areas
    M = np.zeros((space.dim, space.dim))
    for e in range(mesh.n_elements):
        sl = slice(e * nb, (e + 1) * nb)
        M[sl, sl] = jac[e] * block
    return OperatorMatrix(M, tag="mass")


@dataclass(frozen=True)
class DiagonalScaling:
    """Positive diagonal D with C1 ||D^{1/2} w|| <= ||w_N|| <= C2 ||D^{1/2} w||.

    The diagonal is normalized so that C2 = 1 whenever the constants are
    exactly known (area mode) or measured (other modes); this keeps the
    conditioning bound (2C/c)(C2/C1)^2 an upper bound for the measured
    condition number.
    """

    mode: str
    entries: np.ndarray
    C1: float
    C2: float

    @property
    def inv_sqrt(self):
        return 1.0 / np.sqrt(self.entries)


def _measured_constants(space, entries):
    M = mass_matrix(space).data
    d = 1.0 / np.sqrt(entries)
    scaled = d[:, None] * M * d[None, :]
    eig = np.linalg.eigvalsh(scaled)
    lam_min, lam_max = float(eig[0]), float(eig[-1])
    if lam_min <= 0.0:
        raise ValueError("scaling produced a non-SPD normalized mass matrix")
    return lam_min, lam_max


def diagonal_scaling(space, mode=AREA, operator_matrix=None):
    nb = space.nb
    areas = np.repeat(space.mesh.areas if space.d == 2
                      else 2.0 * space.mesh.areas, nb)
    if mode == AREA:
        block = _reference_mass_block(space.d, space.p)
        lam = np.linalg.eigvalsh(block)
        entries = areas * lam[-1]
        C1 = float(np.sqrt(lam[0] / lam[-1]))
        return DiagonalScaling(AREA, entries, C1, 1.0)
    if mode == OPERATOR_DIAGONAL:
        if operator_matrix is None:
            raise ValueError("operator_diagonal mode needs the assembled matrix")
        if space.d == 2:
            warnings.warn("operator_diagonal scaling for d=2 is experimental",
                          stacklevel=2)
        diag = np.abs(np.diagonal(operator_matrix.data
                                  if isinstance(operator_matrix, OperatorMatrix)
                                  else operator_matrix))
        if np.any(diag <= 0.0):
            raise ValueError(
                "zero diagonal entry in operator_diagonal scaling; "
                "assembly or coercivity hypothesis failure")
        lam_min, lam_max = _measured_constants(space, diag)
        entries = diag * lam_max
        return DiagonalScaling(OPERATOR_DIAGONAL, entries,
                               float(np.sqrt(lam_min / lam_max)), 1.0)
    if mode == IDENTITY:
        entries = np.ones(space.dim)
        lam_min, lam_max = _measured_constants(space, entries)
        entries = entries * lam_max
        return DiagonalScaling(IDENTITY, entries,
                               float(np.sqrt(lam_min / lam_max)), 1.0)
    raise ValueError(f"unknown scaling mode {mode!r}")


def load_vector(space, f):
    """(f, psi_i) for a function f evaluable at quadrature points."""
    pts, wts, bas, _ = space.element_quadrature()
    vals = np.asarray(f(pts.reshape(-1, space.d))).reshape(wts.shape)
    out = np.einsum("eq,qa->ea", wts * vals, bas)
    return out.reshape(-1)


def l2_project(space, f):
    """Coefficients of the L2(Gamma)-orthogonal projection of f."""
    M = mass_matrix(space).data
    return np.linalg.solve(M, load_vector(space, f))


def function_l2_norm(space, f):
    """||f||_{L2(Gamma)} by element quadrature."""
    pts, wts, _, _ = space.element_quadrature()
    vals = np.asarray(f(pts.reshape(-1, space.d))).reshape(wts.shape)
    return float(np.sqrt(np.sum(wts * np.abs(vals) ** 2)))


def coefficient_l2_norm(space, coeffs):
    M = mass_matrix(space).data
    c = np.asarray(coeffs)
    return float(np.sqrt(np.real(np.conj(c) @ (M @ c))))


__all__ = [
    "AREA", "OPERATOR_DIAGONAL", "IDENTITY", "Space", "DiagonalScaling",
    "basis_values", "build_space", "mass_matrix", "diagonal_scaling",
    "l2_project", "load_vector", "function_l2_norm", "coefficient_l2_norm",
    "pair_quadrature",
]

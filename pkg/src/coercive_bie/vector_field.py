"""Multiplier fields Z on the boundary.

Three kinds:

* star:      Z(x) = x - x0; Lipschitz constant 1; on a mesh that is
             star-shaped about x0, ess inf Z . n equals the star radius.
* normal:    Z = n panelwise; reproduces the classical operators
             (K_n = D).  No coercivity theory attaches to it.
* partition: Z(x) = sum_m theta_m(x) Z_m built from a ball cover of the
             boundary with piecewise-linear radial cutoffs
             chi(t) = 1 on [0, mu], (1 - t)/(1 - mu) on [mu, 1], 0 beyond.
             All constants (max overlap M*, min radius a, the Lipschitz
             bound M* ||chi'|| / a and the coupling alpha
             3 M* ||chi'|| / (2 a)) are certified, not sampled.
"""

from dataclasses import dataclass, replace

import numpy as np

from .discretization import Space
from .geometry import star_radius

STAR = "star"
NORMAL = "normal"
PARTITION = "partition"


@dataclass(frozen=True)
class Chart:
    """One cover ball: center x_m, radius a_m, outward unit direction Z_m."""

    center: np.ndarray
    radius: float
    direction: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        z = np.asarray(self.direction, dtype=float)
        nz = np.linalg.norm(z)
        if abs(nz - 1.0) > 1e-12:
            z = z / nz
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "direction", z)
        if self.radius <= 0.0:
            raise ValueError("chart radius must be positive")


@dataclass(frozen=True)
class FieldConstants:
    """c = ess inf Z.n, the Lipschitz bound L_Z, and the minimal
    coercivity-guaranteeing coupling constant for the given regime."""

    c: float
    L_Z: float
    alpha: float
    norm_bound: float = None


@dataclass(frozen=True)
class VectorField:
    kind: str
    x0: np.ndarray = None
    charts: tuple = ()
    mu: float = 0.0
    # cached after bind():
    c: float = None
    mstar: int = None
    a_min: float = None
    lz_bound: float = None
    alpha: float = None

    @property
    def chi_slope(self):
        """||chi'||_inf = 1 / (1 - mu) for the partition cutoff."""
        return 1.0 / (1.0 - self.mu)

    def evaluate(self, points, normals=None):
        """Z at points (n, d); `normals` aligned with points is required
        for the normal field."""
        pts = np.asarray(points, dtype=float)
        if self.kind == STAR:
            return pts - self.x0[None, :]
        if self.kind == NORMAL:
            if normals is None:
                raise ValueError("normal field evaluation needs panel normals")
            return np.asarray(normals, dtype=float)
        out = np.zeros_like(pts)
        for ch in self.charts:
            t = np.linalg.norm(pts - ch.center[None, :], axis=1) / ch.radius
            theta = np.clip((1.0 - t) / (1.0 - self.mu), 0.0, 1.0)
            out += theta[:, None] * ch.direction[None, :]
        return out


def star_field(x0):
    return VectorField(STAR, x0=np.asarray(x0, dtype=float))


def normal_field():
    return VectorField(NORMAL)


def build_partition_field(charts, mu, mesh=None, quad_order=None):
    """Partition-of-unity field from a ball cover.

    charts: iterable of (center, radius, direction) or Chart.
    When a mesh is given the cover is validated immediately (shrunken
    balls must contain every panel quadrature point) and the certified
    constants are cached on the returned field.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    normed = tuple(
        ch if isinstance(ch, Chart) else Chart(*ch) for ch in charts)
    if not normed:
        raise ValueError("need at least one chart")
    field = VectorField(PARTITION, charts=normed, mu=mu)
    if mesh is not None:
        field = bind(field, mesh, quad_order=quad_order)
    return field


def _quad_points(mesh, quad_order):
    space = Space(mesh, 0, quad_order or 0)
    pts, _, _, _ = space.element_quadrature()
    ne, nq, d = pts.shape
    normals = np.broadcast_to(mesh.normals[:, None, :], pts.shape)
    return pts.reshape(-1, d), normals.reshape(-1, d)


def bind(field, mesh, quad_order=None):
    """Attach a mesh: validate (partition cover) and cache constants."""
    pts, normals = _quad_points(mesh, quad_order)
    if field.kind == STAR:
        c = star_radius(mesh, field.x0)
        return replace(field, c=c, lz_bound=1.0)
    if field.kind == NORMAL:
        return replace(field, c=1.0)
    centers = np.stack([ch.center for ch in field.charts])
    radii = np.array([ch.radius for ch in field.charts])
    dist = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
    covered = (dist <= field.mu * radii[None, :]).any(axis=1)
    if not covered.all():
        bad = pts[~covered][:5]
        raise ValueError(
            "partition cover failure: shrunken balls miss quadrature "
            f"points, e.g. {bad.tolist()}")
    overlap = (dist <= radii[None, :]).sum(axis=1)
    mstar = int(overlap.max())
    zvals = field.evaluate(pts)
    c = float(np.sum(zvals * normals, axis=1).min())
    if c <= 0.0:
        raise ValueError(
            f"partition field is not uniformly outward: min Z.n = {c}")
    a_min = float(radii.min())
    lz = mstar * field.chi_slope / a_min
    alpha = 1.5 * mstar * field.chi_slope / a_min
    return replace(field, c=c, mstar=mstar, a_min=a_min, lz_bound=lz,
                   alpha=alpha)


def field_constants(field, mesh, regime="interior"):
    """Certified constants and the minimal coercivity-guaranteeing
    coupling for the regime; see the coercivity thresholds:

    * star field:      alpha >= -(d-2)/2 interior, +(d-2)/2 exterior
    * partition field: alpha >= 3 d L_Z / 2 with the certified L_Z bound
    * normal field:    no coercivity guarantee (raises)
    """
    if regime not in ("interior", "exterior"):
        raise ValueError("regime must be 'interior' or 'exterior'")
    if field.kind == NORMAL:
        raise ValueError(
            "no coercivity guarantee available for the normal field")
    bound = field if field.c is not None else bind(field, mesh)
    if field.kind == STAR:
        d = mesh.d
        alpha = (-(d - 2) / 2.0) if regime == "interior" else ((d - 2) / 2.0)
        return FieldConstants(c=bound.c, L_Z=1.0, alpha=alpha)
    alpha = 1.5 * mesh.d * bound.lz_bound
    nb = appendix_norm_bound(bound) if bound.mstar is not None else None
    return FieldConstants(c=bound.c, L_Z=bound.lz_bound, alpha=alpha,
                          norm_bound=nb)


def appendix_norm_bound(field, norm_dprime=None, norm_grad_s=None,
                        norm_s=None):
    """Upper bound for ||A'_{I,Z,alpha}|| with the partition field and
    its stored alpha:

        M* (1/2 + ||D'|| + ||grad_G S||) + (3 ||chi'|| / (2a)) ||S||.

    Callers supply the primitive operator norms (e.g. measured discrete
    2-norms); defaults of None return None.
    """
    if None in (norm_dprime, norm_grad_s, norm_s):
        return None
    return (field.mstar * (0.5 + norm_dprime + norm_grad_s)
            + 1.5 * field.chi_slope / field.a_min * norm_s)

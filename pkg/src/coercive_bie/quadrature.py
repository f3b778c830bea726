"""Quadrature rules for panel integrals and panel-pair integrals.

Reference conventions:

* segment (d=2): parameter t in [0,1], x = a + t (b - a), ds = h dt.
* triangle (d=3): simplex coords (u, v) with u, v >= 0, u + v <= 1,
  x = A + u (B - A) + v (C - A), ds = 2 |T| du dv.

Pair rules integrate over the reference product domain; element
Jacobians are applied by the caller.  Singular pair classes:

* d=2 self:      strip substitution u = s - t with a geometrically
                 graded u-rule (handles log kernels).
* d=2 adjacent:  tensor rule graded toward the shared corner.
* d=3 self:      relative-coordinate splitting of T x T into six
                 regions z = y - x = xi * v_k(eta); the xi factor
                 cancels the 1/r singularity exactly.
* d=3 edge:      simplex-Duffy in the three vanishing barycentric
                 variables (beta, delta, alpha-gamma).
* d=3 vertex:    radial Duffy from the shared vertex.

All transformed integrands are piecewise analytic, so tensor Gauss
converges geometrically in the rule order.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SELF = "self"
ADJACENT = "adjacent"   # d=2 shared vertex
EDGE = "edge"           # d=3 shared edge
VERTEX = "vertex"       # d=3 shared vertex
SEPARATED = "separated"


@lru_cache(maxsize=None)
def gauss01(n):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def graded01(q, levels=12, sigma=0.2):
    """Composite Gauss rule on [0,1], geometrically graded toward 0.

    Integrates endpoint log/power-integrable singularities to near
    machine precision; the innermost cell keeps the full interval so no
    mass is dropped.
    """
    xs, ws = [], []
    gx, gw = gauss01(q)
    breaks = [1.0] + [sigma ** l for l in range(1, levels + 1)] + [0.0]
    for hi, lo in zip(breaks[:-1], breaks[1:]):
        xs.append(lo + (hi - lo) * gx)
        ws.append((hi - lo) * gw)
    return np.concatenate(xs), np.concatenate(ws)


_TRI_RULES = {
    1: [((1 / 3, 1 / 3), 1.0)],
    3: [((2 / 3, 1 / 6), 1 / 3), ((1 / 6, 2 / 3), 1 / 3), ((1 / 6, 1 / 6), 1 / 3)],
    6: [
        ((0.816847572980459, 0.091576213509771), 0.109951743655322),
        ((0.091576213509771, 0.816847572980459), 0.109951743655322),
        ((0.091576213509771, 0.091576213509771), 0.109951743655322),
        ((0.108103018168070, 0.445948490915965), 0.223381589678011),
        ((0.445948490915965, 0.108103018168070), 0.223381589678011),
        ((0.445948490915965, 0.445948490915965), 0.223381589678011),
    ],
    7: [
        ((1 / 3, 1 / 3), 0.225),
        ((0.797426985353087, 0.101286507323456), 0.125939180544827),
        ((0.101286507323456, 0.797426985353087), 0.125939180544827),
        ((0.101286507323456, 0.101286507323456), 0.125939180544827),
        ((0.059715871789770, 0.470142064105115), 0.132394152788506),
        ((0.470142064105115, 0.059715871789770), 0.132394152788506),
        ((0.470142064105115, 0.470142064105115), 0.132394152788506),
    ],
}


@lru_cache(maxsize=None)
def triangle_rule(spec=6):
    """Rule on the unit simplex; weights sum to 1/2.

    `spec` is a named point count (1, 3, 6, 7) or ("duffy", q) for a
    collapsed q x q tensor-Gauss rule.
    """
    if isinstance(spec, tuple) and spec[0] == "duffy":
        q = spec[1]
        gx, gw = gauss01(q)
        u = np.repeat(gx, q)
        b = np.tile(gx, q)
        w = np.repeat(gw, q) * np.tile(gw, q) * (1.0 - u)
        return np.stack([u, b * (1.0 - u)], axis=1), w
    pts = _TRI_RULES[spec]
    uv = np.array([p for p, _ in pts])
    w = 0.5 * np.array([wt for _, wt in pts])
    return uv, w


@dataclass(frozen=True)
class PairRule:
    """Reference product-domain rule: sum_n w[n] F(xhat[n], yhat[n])
    approximates the integral of F over the reference pair domain."""

    pair_class: str
    xhat: np.ndarray   # (n,) for d=2, (n, 2) simplex coords for d=3
    yhat: np.ndarray
    weights: np.ndarray


def _tensor(x1, w1, x2, w2):
    return (np.repeat(x1, len(x2)), np.tile(x2, len(x1)),
            np.repeat(w1, len(w2)) * np.tile(w2, len(w1)))


@lru_cache(maxsize=None)
def segment_pair_separated(q=4):
    s, t, w = _tensor(*gauss01(q), *gauss01(q))
    return PairRule(SEPARATED, s, t, w)


@lru_cache(maxsize=None)
def segment_pair_self(q=8, levels=14, sigma=0.2):
    """Strip rule on the unit square with diagonal singularity s = t."""
    gu, wu = graded01(q, levels, sigma)
    gt, wt = gauss01(q)
    ss, tt, ww = [], [], []
    for u, wui in zip(gu, wu):
        span = 1.0 - u
        if span <= 0.0:
            continue
        t = span * gt
        w = wui * span * wt
        ss.append(t + u)
        tt.append(t)
        ww.append(w)
        ss.append(t)
        tt.append(t + u)
        ww.append(w)
    return PairRule(SELF, np.concatenate(ss), np.concatenate(tt),
                    np.concatenate(ww))


@lru_cache(maxsize=None)
def segment_pair_adjacent(q=6, levels=12, sigma=0.2):
    """Tensor rule graded toward the shared corner at parameters (0, 0).

    Callers flip parameters so the shared vertex sits at t = 0 on both
    elements.
    """
    gx, wx = graded01(q, levels, sigma)
    s, t, w = _tensor(gx, wx, gx, wx)
    return PairRule(ADJACENT, s, t, w)


# d=3 self: six regions, z = yhat - xhat = xi * v_k(eta),
# xhat = p_k(xi, eta) + (1 - xi) * uhat.
def _self3_region(k, xi, eta):
    if k == 0:
        v = np.stack([1.0 - eta, eta], axis=-1)
        p = np.zeros_like(v)
    elif k == 1:
        v = np.stack([-(1.0 - eta), -eta], axis=-1)
        p = np.stack([xi * (1.0 - eta), xi * eta], axis=-1)
    elif k == 2:
        v = np.stack([np.ones_like(eta), -eta], axis=-1)
        p = np.stack([np.zeros_like(eta), xi * eta], axis=-1)
    elif k == 3:
        v = np.stack([eta, -np.ones_like(eta)], axis=-1)
        p = np.stack([np.zeros_like(eta), xi], axis=-1)
    elif k == 4:
        v = np.stack([-eta, np.ones_like(eta)], axis=-1)
        p = np.stack([xi * eta, np.zeros_like(eta)], axis=-1)
    else:
        v = np.stack([-np.ones_like(eta), eta], axis=-1)
        p = np.stack([xi, np.zeros_like(eta)], axis=-1)
    return v, p


@lru_cache(maxsize=None)
def triangle_pair_self(q=8, tri_spec=6):
    gxi, wxi = gauss01(q)
    geta, weta = gauss01(q)
    uv, wt = triangle_rule(tri_spec)
    xh, yh, ww = [], [], []
    for k in range(6):
        xi = np.repeat(gxi, q)
        eta = np.tile(geta, q)
        w2 = np.repeat(wxi, q) * np.tile(weta, q) * xi * (1.0 - xi) ** 2
        v, p = _self3_region(k, xi, eta)
        for (u1, u2), wm in zip(uv, wt):
            xhat = p + (1.0 - xi)[:, None] * np.array([u1, u2])
            yhat = xhat + xi[:, None] * v
            xh.append(xhat)
            yh.append(yhat)
            ww.append(w2 * wm)
    return PairRule(SELF, np.concatenate(xh), np.concatenate(yh),
                    np.concatenate(ww))


@lru_cache(maxsize=None)
def triangle_pair_edge(q=6):
    """Shared edge between local vertices 0 and 1 of both triangles.

    x = V0 + alpha (V1 - V0) + beta (A - V0),
    y = V0 + gamma (V1 - V0) + delta (B - V0);
    xhat = (alpha, beta), yhat = (gamma, delta).

    The three vanishing variables (beta, delta, |alpha - gamma|) are
    mapped through a simplex Duffy transform (beta, delta, tau) =
    rho (w1, w2, w3); the w-simplex is parametrized so the radial limit
    1/max(b, 1-b) depends on one coordinate only, and that coordinate's
    Gauss rule is split at b = 1/2 where the limit has a kink.
    """
    gb, wb = gauss01(q)
    gc, wc = gauss01(q)
    grho, wrho = gauss01(q)
    ggam, wgam = gauss01(q)
    xh, yh, ww = [], [], []
    for sigma in (1.0, -1.0):
        for b0, b1 in ((0.0, 0.5), (0.5, 1.0)):
            for bi, wbi in zip(b0 + (b1 - b0) * gb, (b1 - b0) * wb):
                msig = max(bi, 1.0 - bi)
                rho_max = 1.0 / msig
                for ci, wci in zip(gc, wc):
                    if sigma > 0:
                        a1, a2 = (1.0 - bi) * ci, bi
                    else:
                        a1, a2 = bi, (1.0 - bi) * ci
                    a3 = 1.0 - a1 - a2
                    wpt = wbi * wci * (1.0 - bi)
                    rho = rho_max * grho
                    wr = rho_max * wrho
                    for r, wri in zip(rho, wr):
                        beta = r * a1
                        delta = r * a2
                        tau = r * a3
                        span = 1.0 - r * msig
                        if span <= 0.0:
                            continue
                        glo = 0.0 if sigma > 0 else tau
                        gam = glo + span * ggam
                        alpha = gam + sigma * tau
                        n = len(gam)
                        xh.append(np.stack(
                            [alpha, np.full(n, beta)], axis=1))
                        yh.append(np.stack(
                            [gam, np.full(n, delta)], axis=1))
                        ww.append(wpt * wri * span * wgam * r * r)
    return PairRule(EDGE, np.concatenate(xh), np.concatenate(yh),
                    np.concatenate(ww))


@lru_cache(maxsize=None)
def triangle_pair_vertex(q=6, qang=5):
    """Shared vertex at local vertex 0 of both triangles.

    Simplex coords relative to (V, A1, A2): x = (xi (1 - eta), xi eta).
    """
    grho, wrho = gauss01(q)
    gw, ww_ = gauss01(q)
    geta, weta = gauss01(qang)
    xh, yh, ww = [], [], []
    rho = np.repeat(grho, q)
    wfac = np.repeat(wrho, q)
    s = np.tile(gw, q)
    wfac = wfac * np.tile(ww_, q)
    for swap in (False, True):
        xi_a = rho
        xi_b = rho * s
        base_w = wfac * rho ** 3 * s
        for ea, wa in zip(geta, weta):
            for eb, wb in zip(geta, weta):
                ua = np.stack([xi_a * (1.0 - ea), xi_a * ea], axis=1)
                ub = np.stack([xi_b * (1.0 - eb), xi_b * eb], axis=1)
                if swap:
                    ua, ub = ub, ua
                xh.append(ua)
                yh.append(ub)
                ww.append(base_w * wa * wb)
    return PairRule(VERTEX, np.concatenate(xh), np.concatenate(yh),
                    np.concatenate(ww))


@lru_cache(maxsize=None)
def triangle_pair_separated(tri_spec=6):
    uv, w = triangle_rule(tri_spec)
    n = len(w)
    idx = np.repeat(np.arange(n), n)
    jdx = np.tile(np.arange(n), n)
    return PairRule(SEPARATED, uv[idx], uv[jdx], w[idx] * w[jdx])


def pair_quadrature(pair_class, kernel_singularity="log", order=None, d=2):
    """Reference pair rule for a given element-pair class.

    `kernel_singularity` ('log' or 'power') is accepted for interface
    completeness; the transforms used here regularize both.
    """
    if kernel_singularity not in ("log", "power"):
        raise ValueError("kernel_singularity must be 'log' or 'power'")
    if d == 2:
        if pair_class == SELF:
            return segment_pair_self(order or 8)
        if pair_class == ADJACENT:
            return segment_pair_adjacent(order or 6)
        if pair_class == SEPARATED:
            return segment_pair_separated(order or 4)
    else:
        if pair_class == SELF:
            return triangle_pair_self(order or 8, 7)
        if pair_class == EDGE:
            return triangle_pair_edge(order or 5)
        if pair_class in (VERTEX, ADJACENT):
            return triangle_pair_vertex(order or 5, 4)
        if pair_class == SEPARATED:
            return triangle_pair_separated(6 if order is None else ("duffy", order))
    raise ValueError(f"unknown pair class {pair_class!r} for d={d}")

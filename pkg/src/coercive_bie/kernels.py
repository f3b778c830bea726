"""Fundamental solutions and their gradients for Laplace and Helmholtz.

Conventions (d = 2 or 3, r = |x - y|):

* Laplace d=2:   phi = log(a/r) / (2 pi), with a > 0 a length scale.
                 For exterior / invertibility work a must exceed diam(G).
* Laplace d=3:   phi = 1 / (4 pi r).
* Helmholtz d=2: phi = (i/4) H0^(1)(k r).
* Helmholtz d=3: phi = exp(i k r) / (4 pi r).

`grad_y_phi` is the gradient with respect to the *second* argument; for
these radial kernels grad_x phi = -grad_y phi.
"""

from dataclasses import dataclass

import numpy as np

from .hankel import hankel1_01

LAPLACE = "laplace"
HELMHOLTZ = "helmholtz"

FOUR_PI = 4.0 * np.pi
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Kernel:
    """A fundamental-solution family: equation, dimension, parameters."""

    equation: str
    d: int
    a: float = 1.0   # laplace d=2 length scale
    k: float = 0.0   # helmholtz wavenumber

    def __post_init__(self):
        if self.equation not in (LAPLACE, HELMHOLTZ):
            raise ValueError(f"unknown equation {self.equation!r}")
        if self.d not in (2, 3):
            raise ValueError("only d = 2 and d = 3 are supported")
        if self.equation == LAPLACE and self.d == 2 and self.a <= 0.0:
            raise ValueError("laplace d=2 requires a > 0")
        if self.equation == HELMHOLTZ and not self.k > 0.0:
            raise ValueError("helmholtz requires k > 0")

    @property
    def is_complex(self):
        return self.equation == HELMHOLTZ


def laplace2(a=1.0):
    return Kernel(LAPLACE, 2, a=a)


def laplace3():
    return Kernel(LAPLACE, 3)


def helmholtz2(k):
    return Kernel(HELMHOLTZ, 2, k=k)


def helmholtz3(k):
    return Kernel(HELMHOLTZ, 3, k=k)


def _pair_distance(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    return diff, r


def phi(kernel, x, y):
    """Fundamental solution phi(x, y), vectorized over leading axes.

    Raises on coincident points (the kernels are singular there).
    """
    diff, r = _pair_distance(x, y)
    if np.any(r == 0.0):
        raise ValueError("phi evaluated at coincident points")
    return phi_r(kernel, r)


def phi_r(kernel, r):
    """phi as a function of the distance r > 0 alone."""
    r = np.asarray(r, dtype=float)
    if kernel.equation == LAPLACE:
        if kernel.d == 2:
            return np.log(kernel.a / r) / TWO_PI
        return 1.0 / (FOUR_PI * r)
    if kernel.d == 3:
        return np.exp(1j * kernel.k * r) / (FOUR_PI * r)
    h0, _ = hankel1_01(kernel.k * r)
    return 0.25j * h0


def grad_y_phi(kernel, x, y):
    """Gradient of phi with respect to y; shape broadcasts with inputs."""
    diff, r = _pair_distance(x, y)
    if np.any(r == 0.0):
        raise ValueError("grad_y_phi evaluated at coincident points")
    return diff * grad_y_phi_factor(kernel, r)[..., None]


def grad_y_phi_factor(kernel, r):
    """Scalar g(r) with grad_y phi = (x - y) g(r).

    Laplace d=2: g = 1/(2 pi r^2); d=3: g = 1/(4 pi r^3).
    Helmholtz d=3: g = exp(ikr)(1 - ikr)/(4 pi r^3);
    d=2: g = (ik/4) H1^(1)(kr)/r.
    """
    r = np.asarray(r, dtype=float)
    if kernel.equation == LAPLACE:
        if kernel.d == 2:
            return 1.0 / (TWO_PI * r * r)
        return 1.0 / (FOUR_PI * r ** 3)
    if kernel.d == 3:
        kr = kernel.k * r
        return np.exp(1j * kr) * (1.0 - 1j * kr) / (FOUR_PI * r ** 3)
    _, h1 = hankel1_01(kernel.k * r)
    return 0.25j * kernel.k * h1 / r

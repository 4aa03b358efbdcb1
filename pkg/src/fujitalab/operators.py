"""Discrete radial operators and the principal Dirichlet eigenpair.

The radial Laplacian is u_rr + (n-1)/r u_r with the removable singularity
at the center handled by the symmetric ghost-node limit
Lap f(0) = n f_rr(0) = 2n (f_1 - f_0)/h^2;  second order is preserved and
the stencil is exact for quadratics at every node.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import solve_banded

from .core import ProblemParams
from .grid import Field, RadialGrid, integrate


def laplacian(f: Field) -> Field:
    g = f.grid
    v = f.values
    h = g.h_r
    r = g.nodes
    n = g.n
    out = np.empty_like(v)
    out[0] = 2.0 * n * (v[1] - v[0]) / h ** 2
    second = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h ** 2
    first = (v[2:] - v[:-2]) / (2.0 * h)
    out[1:-1] = second + (n - 1) / r[1:-1] * first
    # boundary node: shifted 3-point second difference + one-sided first
    # derivative, both exact for quadratics
    fpp = (v[-1] - 2.0 * v[-2] + v[-3]) / h ** 2
    fp = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    out[-1] = fpp + (n - 1) / r[-1] * fp
    return Field(g, out)


def gradient_magnitude(f: Field) -> Field:
    """|d/dr f|; zero at the center by radial symmetry."""
    g = f.grid
    v = f.values
    h = g.h_r
    out = np.empty_like(v)
    out[0] = 0.0
    out[1:-1] = np.abs(v[2:] - v[:-2]) / (2.0 * h)
    out[-1] = abs(3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return Field(g, out)


def rhs(u: Field, params: ProblemParams, h: Optional[Field] = None) -> Field:
    """Reaction part of the equation: |u|^p + b |grad u|^q + h, pointwise.

    Negative values always enter through |u|^p, never u^p.  Diffusion is
    handled separately by the time stepper.
    """
    if not np.all(np.isfinite(u.values)):
        raise ValueError("rhs of a non-finite field")
    out = np.zeros_like(u.values)
    if params.use_source:
        out += np.abs(u.values) ** float(params.p)
    if params.use_gradient and params.b != 0:
        out += float(params.b) * gradient_magnitude(u).values ** float(params.q)
    if h is not None:
        if h.grid != u.grid:
            raise ValueError("forcing field lives on a different grid")
        out += h.values
    return Field(u.grid, out)


def laplacian_banded(grid: RadialGrid) -> Tuple[np.ndarray, float]:
    """Banded (1,1) form of the Laplacian on nodes 0..M (boundary eliminated).

    Returns (ab, c_boundary): ab in scipy solve_banded layout, and the
    coefficient multiplying the fixed boundary value u_{M+1} in row M.
    """
    h = grid.h_r
    r = grid.nodes
    n = grid.n
    m = grid.M + 1  # unknowns: nodes 0..M
    ab = np.zeros((3, m))
    ri = r[1:m]  # interior radii, nodes 1..M
    c_minus = 1.0 / h ** 2 - (n - 1) / (2.0 * h * ri)
    c_plus = 1.0 / h ** 2 + (n - 1) / (2.0 * h * ri)
    ab[1, 0] = -2.0 * n / h ** 2
    ab[0, 1] = 2.0 * n / h ** 2
    ab[1, 1:] = -2.0 / h ** 2
    ab[2, 0:m - 1] = c_minus
    ab[0, 2:] = c_plus[:-1]
    c_boundary = float(c_plus[-1])
    return ab, c_boundary


def _banded_matvec(ab: np.ndarray, x: np.ndarray) -> np.ndarray:
    m = x.size
    y = ab[1] * x
    y[:-1] += ab[0, 1:] * x[1:]
    y[1:] += ab[2, :-1] * x[:-1]
    return y


@dataclass(frozen=True)
class Eigenpair:
    """Principal Dirichlet eigenpair of -Lap on the ball B_R.

    ``phi`` is positive inside, zero on the boundary, and normalized so its
    integral over B_R is 1.  The eigenvalue scales as lam(R) = lam(1)/R^2.
    """

    lam: float
    phi: Field
    R: float


def principal_eigenpair(n: int, R: float, M: int,
                        tol: float = 1e-14, max_iter: int = 500) -> Eigenpair:
    """Smallest Dirichlet eigenvalue/eigenfunction by inverse power iteration.

    Solves the radial problem -(phi'' + (n-1)/r phi') = lam phi, phi(R) = 0,
    phi'(0) = 0 on the discrete Laplacian.  Iterates until the eigenvalue
    estimate stagnates, then demands the residual |Lap phi + lam phi| stay
    below 1e-6 of the eigenfunction's sup norm.
    """
    if M < 100:
        raise ValueError("eigenpair grid needs M >= 100")
    grid = RadialGrid(n, float(R), M)
    ab, _ = laplacian_banded(grid)
    neg = -ab  # -Lap is positive definite on Dirichlet functions

    x = 1.0 - (grid.nodes[:-1] / R) ** 2
    x /= np.linalg.norm(x)
    lam_prev = np.inf
    lam = np.nan
    stagnant = 0
    for _ in range(max_iter):
        y = solve_banded((1, 1), neg, x)
        y /= np.linalg.norm(y)
        by = _banded_matvec(neg, y)
        lam = float(y @ by)
        x = y
        if abs(lam - lam_prev) <= tol * abs(lam):
            stagnant += 1
            if stagnant >= 2:
                break
        else:
            stagnant = 0
        lam_prev = lam
    resid_rel = float(np.max(np.abs(_banded_matvec(neg, x) - lam * x))
                      / np.max(np.abs(x)))
    if stagnant < 2 or resid_rel > 1e-6:
        raise RuntimeError(f"eigenpair iteration did not converge "
                           f"({max_iter} iterations, residual {resid_rel:.2e})")

    if x[0] < 0:
        x = -x
    values = np.concatenate([x, [0.0]])
    phi = Field(grid, values)
    mass = integrate(phi)
    if mass <= 0:
        raise RuntimeError("eigenfunction has nonpositive mass; iteration failed")
    phi = Field(grid, values / mass)
    if np.any(phi.values[:-1] <= 0):
        raise RuntimeError("principal eigenfunction is not positive in the interior")
    return Eigenpair(lam=lam, phi=phi, R=float(R))

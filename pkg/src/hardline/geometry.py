"""Geometry of the ordered-rod table, velocity cones, and the collision manifold.

The configuration space is the cone of ordered positions ``x_1 <= ... <= x_N``
(N rods on a line, radii factored out).  The phase points of interest are the
pairs ``(X, V)`` whose free flight reaches a total simultaneous collision
``X + t V = c * ones`` for some scalars ``t, c``; equivalently the planar
points ``(x_i, v_i)`` are collinear.  The interior of that set is charted by
the positions together with the first two velocities: the remaining velocities
are slaved to ``(u_1, u_2)`` by collinearity through the `velocity_completion`
map.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BoundaryPointError,
    InvalidInputError,
    NoCollisionError,
    NotOnManifoldError,
    SingularChartError,
)

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "PhasePoint",
    "ChartPoint",
    "in_table",
    "cone_membership",
    "on_manifold",
    "velocity_completion",
    "chart_forward",
    "chart_inverse",
    "collision_time",
    "conserved_quantities",
]

_EPS = float(np.finfo(float).eps)


@lru_cache(maxsize=None)
def pair_indices(n: int):
    """Upper-triangle index pair arrays for n rods (cached)."""
    return np.triu_indices(n, k=1)


def _as_vector(a, name: str = "input") -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be a one-dimensional vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances used by membership tests and identity checks.

    ``tol_membership`` is relative; ``fd_step`` is the central-difference step
    used by the finite-difference oracles.
    """

    tol_membership: float = 1e-10
    tol_identity: float = 1e-8
    fd_step: float = 1e-6

    def __post_init__(self):
        for field in ("tol_membership", "tol_identity", "fd_step"):
            if not getattr(self, field) > 0:
                raise InvalidInputError(f"{field} must be strictly positive")
        if self.tol_membership < 10 * _EPS:
            raise InvalidInputError(
                "tol_membership below 10*machine-epsilon is not meaningful"
            )


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A configuration-velocity pair ``(X, V)`` with ``N >= 3`` rods."""

    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_vector(self.x, "x"))
        object.__setattr__(self, "v", _as_vector(self.v, "v"))
        if self.x.size != self.v.size:
            raise InvalidInputError("x and v must have identical length")
        if self.x.size < 3:
            raise InvalidInputError("at least 3 rods are required")
        self.x.setflags(write=False)
        self.v.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.size

    def as_array(self) -> np.ndarray:
        """Concatenated ``(x_1..x_N, v_1..v_N)`` vector in R^{2N}."""
        return np.concatenate([self.x, self.v])

    @classmethod
    def from_array(cls, z) -> "PhasePoint":
        z = _as_vector(z, "z")
        if z.size % 2:
            raise InvalidInputError("phase vector must have even length")
        half = z.size // 2
        return cls(z[:half], z[half:])


@dataclass(frozen=True, eq=False)
class ChartPoint:
    """Chart coordinates ``(X, u_1, u_2)``: ordered positions plus the two
    leading velocities, off the diagonal ``u_1 = u_2``."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_vector(self.x, "x"))
        object.__setattr__(self, "u", _as_vector(self.u, "u"))
        if self.x.size < 3:
            raise InvalidInputError("at least 3 rods are required")
        if self.u.size != 2:
            raise InvalidInputError("u must be a pair (u1, u2)")
        if not np.all(np.diff(self.x) > 0):
            raise InvalidInputError("chart positions must be strictly increasing")
        if self.u[0] == self.u[1]:
            raise InvalidInputError("u1 = u2 lies off the chart domain")
        self.x.setflags(write=False)
        self.u.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.size

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.u])

    @classmethod
    def from_array(cls, zeta) -> "ChartPoint":
        zeta = _as_vector(zeta, "zeta")
        return cls(zeta[:-2], zeta[-2:])


def in_table(x, margin: float = 0.0) -> bool:
    """True iff positions are ordered, ``x_i <= x_{i+1}`` for all i.

    The default test is boundary-inclusive; a positive ``margin`` demands
    ``x_{i+1} - x_i >= margin`` (strict-interior variant).
    """
    x = _as_vector(x, "x")
    if x.size < 3:
        raise InvalidInputError("at least 3 rods are required")
    return bool(np.all(np.diff(x) >= margin))


def cone_membership(v, side: str, margin: float = 0.0) -> bool:
    """Membership in the pre- or post-collisional velocity cone.

    ``side='pre'`` tests for non-increasing components (rods approaching a
    simultaneous collision), ``side='post'`` for non-decreasing ones.  Both
    tests are boundary-inclusive unless ``margin > 0``.
    """
    v = _as_vector(v, "v")
    gaps = -np.diff(v)  # v_i - v_{i+1}
    if side == "pre":
        return bool(np.all(gaps >= margin))
    if side == "post":
        return bool(np.all(-gaps >= margin))
    raise InvalidInputError(f"side must be 'pre' or 'post', got {side!r}")


def on_manifold(z: PhasePoint, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True iff the planar points ``(x_i, v_i)`` are collinear.

    Collinearity is equivalent to the free flight ``X + t V`` meeting the
    diagonal ``c * ones``.  The test requires every 2x2 cross-difference
    ``(v_i - v_j)(x_k - x_l) - (v_k - v_l)(x_i - x_j)`` to vanish relative to
    the larger of the two products, which stays robust for nearly parallel
    data and for the degenerate all-equal-velocity stratum.
    """
    iu, ju = pair_indices(z.n)
    dv = z.v[iu] - z.v[ju]
    dx = z.x[iu] - z.x[ju]
    prod = np.outer(dv, dx)  # prod[p, q] = dv_p * dx_q
    cross = prod - prod.T
    scale = np.maximum(np.abs(prod), np.abs(prod.T))
    return bool(np.all(np.abs(cross) <= tol.tol_membership * scale))


def velocity_completion(x: np.ndarray, u1: float, u2: float) -> np.ndarray:
    """Reconstruct the full velocity vector from ``(X, u1, u2)``.

    Component i is the value at ``x_i`` of the line through ``(x_1, u1)`` and
    ``(x_2, u2)``; in particular components 1 and 2 reproduce ``u1, u2``.
    """
    if x[0] == x[1]:
        raise SingularChartError("x1 = x2: velocity completion is singular")
    return ((x - x[1]) * u1 - (x - x[0]) * u2) / (x[0] - x[1])


def chart_forward(zeta: ChartPoint) -> PhasePoint:
    """Map chart coordinates to the phase point they parametrise."""
    v = velocity_completion(zeta.x, zeta.u[0], zeta.u[1])
    return PhasePoint(zeta.x.copy(), v)


def chart_inverse(z: PhasePoint, tol: ToleranceConfig = DEFAULT_TOL) -> ChartPoint:
    """Project an interior manifold point back to chart coordinates.

    Raises `NotOnManifoldError` if the collinearity test fails or the
    positions are not strictly ordered, and `BoundaryPointError` on the
    ``v1 = v2`` stratum where the chart degenerates.
    """
    if not on_manifold(z, tol):
        raise NotOnManifoldError("phase point fails the collinearity test")
    if not np.all(np.diff(z.x) > 0):
        raise NotOnManifoldError("positions are not strictly increasing")
    if z.v[0] == z.v[1]:
        raise BoundaryPointError("v1 = v2: point is outside the chart domain")
    return ChartPoint(z.x.copy(), z.v[:2].copy())


def collision_time(z: PhasePoint) -> float:
    """Signed time at which the free flight reaches the total collision.

    For interior manifold points the value ``-(x_2 - x_1)/(v_2 - v_1)`` is
    independent of the index pair used.  Raises `NoCollisionError` when
    ``v1 = v2`` (parallel flight, no collision in finite time).
    """
    if z.v[0] == z.v[1]:
        raise NoCollisionError("v1 = v2: trajectory never reaches the collision")
    return -(z.x[1] - z.x[0]) / (z.v[1] - z.v[0])


def conserved_quantities(v) -> tuple[float, float]:
    """Total momentum ``sum v_i`` and kinetic energy ``sum v_i^2``."""
    v = _as_vector(v, "v")
    return float(np.sum(v)), float(np.dot(v, v))

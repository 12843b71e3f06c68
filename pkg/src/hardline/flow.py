"""Billiard flows on the collision manifold and their chart-level reductions.

A flow generated by a scattering map is free shear ``(X + tV, V)`` until the
simultaneous collision at ``tau = collision_time``, after which the state is
``(X + tau V + (t - tau) sigma(V), sigma(V))``; backward flows use the inverse
map.  At exactly ``t = tau`` the stored velocity is the post-collisional one
(forward flows are right-continuous in velocity).  The chart-level reductions
act on ``(X, u1, u2)`` and carry closed-form Jacobian determinants:

    free shear:   ((x1 + t u1 - x2 - t u2)/(x1 - x2))^(N-2)
    scattered:    ((s1 - s2)/(u1 - u2)) * shear^(N-2) * det(Dsigma),

both of which are cross-checked against finite-difference oracles.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryPointError,
    BoundaryUnsupportedError,
    InvalidInputError,
    NoCollisionError,
    NotOnManifoldError,
    WrongBranchError,
)
from .geometry import (
    DEFAULT_TOL,
    ChartPoint,
    PhasePoint,
    ToleranceConfig,
    collision_time,
    on_manifold,
    velocity_completion,
)
from .numdiff import central_jacobian
from .scattering import ScatteringMap, finite_diff_jacobian

__all__ = [
    "FlowResult",
    "TrajectorySample",
    "classify_region",
    "flow_map",
    "trajectory",
    "write_trajectory_csv",
    "chart_collision_time",
    "reduced_flow",
    "reduced_flow_sigma",
    "shear_jacobian_closed_form",
    "scattering_flow_jacobian_closed_form",
]


@dataclass(frozen=True)
class FlowResult:
    """Output of one flow-map evaluation."""

    z_out: PhasePoint
    branch: str  # "free" | "scattered"
    tau: float | None


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    """States of one trajectory at the requested times."""

    times: np.ndarray
    positions: np.ndarray  # (m, N)
    velocities: np.ndarray  # (m, N)
    collision_tau: float | None

    def states(self) -> list[PhasePoint]:
        return [PhasePoint(x, v) for x, v in zip(self.positions, self.velocities)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_trajectory_csv(self, buf)
        return buf.getvalue()


def _require_interior(z: PhasePoint, tol: ToleranceConfig) -> None:
    if not on_manifold(z, tol):
        raise NotOnManifoldError("initial datum fails the collinearity test")
    gaps = np.diff(z.x)
    if np.any(gaps < 0):
        raise NotOnManifoldError("positions are not ordered")
    if np.any(gaps == 0):
        touching = np.flatnonzero(gaps == 0)
        if np.any(z.v[touching] == z.v[touching + 1]):
            raise BoundaryUnsupportedError(
                "datum lies on the manifold boundary (coincident rod pair)"
            )
        raise BoundaryUnsupportedError(
            "datum lies on the table boundary (touching rods)"
        )


def classify_region(z: PhasePoint, t: float,
                    tol: ToleranceConfig = DEFAULT_TOL) -> str:
    """Branch of the flow decomposition a point falls in at horizon t.

    ``"plus"`` means the collision is crossed: ``tau in (0, t]`` for t > 0
    and ``tau in [t, 0)`` for t < 0.  At t = 0 the split is by the sign of
    ``v1 - v2`` (approaching vs receding).
    """
    _require_interior(z, tol)
    if z.v[0] == z.v[1]:
        raise BoundaryPointError("v1 = v2: point is outside the chart domain")
    if t == 0:
        return "plus" if z.v[0] > z.v[1] else "minus"
    tau = collision_time(z)
    if t > 0:
        return "plus" if 0 < tau <= t else "minus"
    return "plus" if t <= tau < 0 else "minus"


def flow_map(map_: ScatteringMap, z: PhasePoint, t: float,
             tol: ToleranceConfig = DEFAULT_TOL) -> FlowResult:
    """Flow an interior manifold point for time t.

    Free branch returns ``(X + tV, V)``; the scattered branch applies the
    map (forward) or its inverse (backward) at the collision.  Parallel data
    ``V = c * ones`` never reach the collision and always flow freely.
    """
    _require_interior(z, tol)
    if t == 0:
        return FlowResult(z, "free", None)
    if z.v[0] == z.v[1]:
        return FlowResult(PhasePoint(z.x + t * z.v, z.v.copy()), "free", None)
    tau = collision_time(z)
    if t > 0:
        crossed = 0 < tau <= t
    else:
        crossed = t <= tau < 0
    if not crossed:
        return FlowResult(PhasePoint(z.x + t * z.v, z.v.copy()), "free", tau)
    if t > 0:
        w = map_.apply(z.v)
    else:
        w = map_.inverse_apply(z.v)
    x_out = z.x + tau * z.v + (t - tau) * w
    return FlowResult(PhasePoint(x_out, w), "scattered", tau)


def trajectory(map_: ScatteringMap, z: PhasePoint, times,
               tol: ToleranceConfig = DEFAULT_TOL) -> TrajectorySample:
    """Evaluate the flow at a sorted list of times."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidInputError("times must be a non-empty vector")
    if np.any(np.diff(times) < 0):
        raise InvalidInputError("times must be sorted")
    positions = np.empty((times.size, z.n))
    velocities = np.empty_like(positions)
    for k, t in enumerate(times):
        res = flow_map(map_, z, float(t), tol)
        positions[k] = res.z_out.x
        velocities[k] = res.z_out.v
    try:
        tau = collision_time(z)
    except NoCollisionError:
        tau = None
    return TrajectorySample(times, positions, velocities, tau)


def write_trajectory_csv(sample: TrajectorySample, fh) -> None:
    """Write ``t,x1..xN,v1..vN`` rows with 17 significant digits."""
    n = sample.positions.shape[1]
    header = ["t"] + [f"x{i}" for i in range(1, n + 1)] + [
        f"v{i}" for i in range(1, n + 1)
    ]
    fh.write(",".join(header) + "\n")
    for t, x, v in zip(sample.times, sample.positions, sample.velocities):
        row = [t, *x, *v]
        fh.write(",".join(f"{val:.17g}" for val in row) + "\n")


# ---------------------------------------------------------------------------
# chart-level (reduced) flows
# ---------------------------------------------------------------------------

def chart_collision_time(zeta: ChartPoint) -> float:
    """Collision time in chart coordinates, ``(x2 - x1)/(u1 - u2)``."""
    return (zeta.x[1] - zeta.x[0]) / (zeta.u[0] - zeta.u[1])


def _chart_crossed(zeta: ChartPoint, t: float) -> bool:
    if t == 0:
        return zeta.u[0] > zeta.u[1]
    tau = chart_collision_time(zeta)
    if t > 0:
        return 0 < tau <= t
    return t <= tau < 0


def reduced_flow(zeta: ChartPoint, t: float) -> ChartPoint:
    """Chart-level free shear ``(X + t psi(zeta), U)``.

    Valid on the non-crossing branch; t = 0 is the identity everywhere.
    """
    if t == 0:
        return zeta
    if _chart_crossed(zeta, t):
        raise WrongBranchError("point crosses the collision on (0, t]")
    psi = velocity_completion(zeta.x, zeta.u[0], zeta.u[1])
    return ChartPoint(zeta.x + t * psi, zeta.u.copy())


def reduced_flow_sigma(map_: ScatteringMap, zeta: ChartPoint,
                       t: float) -> ChartPoint:
    """Chart-level scattered update on the crossing branch.

    Positions move to ``X + tau psi + (t - tau) w`` with ``w = sigma(psi)``
    (or the inverse map for t < 0); the chart velocities become the first two
    components of ``w``.  The remaining components of ``w`` are recovered by
    the chart of the output point, which is the residual part of the update.
    """
    if not _chart_crossed(zeta, t):
        raise WrongBranchError("point does not cross the collision on (0, t]")
    psi = velocity_completion(zeta.x, zeta.u[0], zeta.u[1])
    tau = chart_collision_time(zeta)
    if t >= 0:
        w = map_.apply(psi)
    else:
        w = map_.inverse_apply(psi)
    return ChartPoint(zeta.x + tau * psi + (t - tau) * w, w[:2].copy())


def shear_jacobian_closed_form(zeta: ChartPoint, t: float) -> float:
    """Determinant of the chart shear, closed form."""
    num = zeta.x[0] + t * zeta.u[0] - zeta.x[1] - t * zeta.u[1]
    return float((num / (zeta.x[0] - zeta.x[1])) ** (zeta.n - 2))


def scattering_flow_jacobian_closed_form(map_: ScatteringMap, zeta: ChartPoint,
                                         t: float, step: float = 1e-6) -> float:
    """Determinant of the chart-level scattered flow, closed form.

    The product ``((s1 - s2)/(u1 - u2)) * shear^(N-2) * det(Dsigma(psi))``
    uses the analytic map Jacobian when available and falls back to central
    differences otherwise.
    """
    psi = velocity_completion(zeta.x, zeta.u[0], zeta.u[1])
    if t >= 0:
        w = map_.apply(psi, check_domain=False)
        jac = map_.jacobian(psi)
        if jac is None:
            jac = finite_diff_jacobian(map_, psi, step)
    else:
        w = map_.inverse_apply(psi, check_domain=False)
        jac = central_jacobian(
            lambda q: map_.inverse_apply(q, check_domain=False), psi, step
        )
    det_sigma = float(np.linalg.det(jac))
    factor = (w[0] - w[1]) / (zeta.u[0] - zeta.u[1])
    return float(factor * shear_jacobian_closed_form(zeta, t) * det_sigma)

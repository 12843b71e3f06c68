"""Densities on the collision manifold and pushforward-invariance testing.

Integrals over the manifold are computed in chart coordinates: for a density
``rho`` relative to the surface (Hausdorff) measure,

    integral Phi d(mu) = integral_Omega Phi(Psi(zeta)) rho(Psi(zeta)) omega(zeta) dzeta,

where ``omega`` is the area element of the chart.  The canonical invariant
density is

    L(X, V) = prod_{i<j} ((v_i - v_j)^2 + (x_i - x_j)^2)^(-(N-2)/(N(N-1))),

and pushforward invariance ``<T^t # mu, Phi> = <mu, Phi>`` is estimated by
uniform Monte Carlo over an explicit chart box with exclusion margins that
keep the integrand away from the singular strata.  A deterministic midpoint
fine-grid oracle backs the statistical verdicts.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDensityError,
    InvalidInputError,
    NotOnManifoldError,
    RegionTooSmallError,
)
from .geometry import (
    DEFAULT_TOL,
    ChartPoint,
    PhasePoint,
    ToleranceConfig,
    on_manifold,
    pair_indices as _triu,
)
from .numdiff import central_jacobian
from .scattering import ScatteringMap, sample_pre_cone

__all__ = [
    "MeasureSpec",
    "TestFunction",
    "ChartRegion",
    "MCConfig",
    "InvarianceReport",
    "surface_density",
    "gram_density_oracle",
    "liouville_density",
    "integrate",
    "invariance_report",
    "density_factory",
    "functional_equation_check",
    "grid_integral",
    "sample_chart_points",
]


# ---------------------------------------------------------------------------
# batched kernels shared by the MC estimator and the grid oracle
# ---------------------------------------------------------------------------

def _psi_batch(X: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    d12 = (X[:, 0] - X[:, 1])[:, None]
    return ((X - X[:, 1:2]) * u1[:, None] - (X - X[:, 0:1]) * u2[:, None]) / d12


def _omega_batch(X: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    n = X.shape[1]
    iu, ju = _triu(n)
    dx12 = X[:, 0] - X[:, 1]
    ssum = np.sum((X[:, iu] - X[:, ju]) ** 2, axis=1)
    return (
        ((u1 - u2) ** 2 + dx12**2) ** ((n - 2) / 2)
        / np.abs(dx12) ** (n - 1)
        * np.sqrt(ssum)
    )


def _liouville_batch(X: np.ndarray, V: np.ndarray) -> np.ndarray:
    n = X.shape[1]
    iu, ju = _triu(n)
    q = (V[:, iu] - V[:, ju]) ** 2 + (X[:, iu] - X[:, ju]) ** 2
    expo = (n - 2) / (n * (n - 1))
    with np.errstate(divide="ignore"):
        return np.exp(-expo * np.sum(np.log(q), axis=1))


def _flow_batch(map_: ScatteringMap, X: np.ndarray, V: np.ndarray, t: float):
    """Row-wise flow for time t; rows with v1 = v2 never cross."""
    if t == 0:
        return X.copy(), V.copy()
    dv = V[:, 0] - V[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(dv != 0.0, (X[:, 1] - X[:, 0]) / dv, np.inf)
    if t > 0:
        crossed = (tau > 0) & (tau <= t)
    else:
        crossed = (tau >= t) & (tau < 0)
    x_out = X + t * V
    v_out = V.copy()
    if np.any(crossed):
        vc = V[crossed]
        w = map_.apply_batch(vc) if t > 0 else map_.inverse_batch(vc)
        tc = tau[crossed][:, None]
        x_out[crossed] = X[crossed] + tc * vc + (t - tc) * w
        v_out[crossed] = w
    return x_out, v_out


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """A density on the manifold, relative to the surface measure.

    ``kind`` is one of ``hausdorff`` (density 1), ``liouville`` (the canonical
    density L), or ``custom`` (a multiplier ``m(X, V)`` times L).  Custom
    multipliers must be numpy-vectorised over (m, n) position/velocity blocks.
    """

    kind: str
    label: str
    m: object = None

    @classmethod
    def hausdorff(cls) -> "MeasureSpec":
        return cls("hausdorff", "hausdorff")

    @classmethod
    def liouville(cls) -> "MeasureSpec":
        return cls("liouville", "liouville")

    @classmethod
    def from_multiplier(cls, m, label: str = "custom") -> "MeasureSpec":
        return cls("custom", label, m)

    def density_batch(self, X: np.ndarray, V: np.ndarray) -> np.ndarray:
        if self.kind == "hausdorff":
            return np.ones(X.shape[0])
        L = _liouville_batch(X, V)
        if self.kind == "liouville":
            return L
        return np.asarray(self.m(X, V), dtype=float) * L

    def multiplier_batch(self, X: np.ndarray, V: np.ndarray) -> np.ndarray:
        """The density divided by the canonical one (``m = M/L``)."""
        if self.kind == "hausdorff":
            raise InvalidInputError(
                "the surface measure has no finite multiplier relative to the "
                "canonical density"
            )
        if self.kind == "liouville":
            return np.ones(X.shape[0])
        return np.asarray(self.m(X, V), dtype=float)


def density_factory(f, g, map_: ScatteringMap, dim: int | None = None,
                    n_check: int = 256, seed: int = 0,
                    tol: float = 1e-10) -> MeasureSpec:
    """Build an invariant density ``f(X . (E(V) ones - P(V) V)) g(V) L``.

    ``f`` maps a vector of collision invariants to weights and ``g`` must be
    constant on orbits of the registered map, which is verified on sampled
    pre-collisional velocities; a violation raises `InvalidDensityError`.
    Both callables must be numpy-vectorised.
    """
    dim = getattr(map_, "n", None) or dim
    if dim is None:
        raise InvalidInputError("dim is required for maps without a fixed size")
    V = sample_pre_cone(n_check, dim, np.random.default_rng(seed))
    gv = np.asarray(g(V), dtype=float)
    gw = np.asarray(g(map_.apply_batch(V)), dtype=float)
    dev = np.max(np.abs(gw - gv) / (1.0 + np.abs(gv)))
    if dev > tol:
        raise InvalidDensityError(
            f"g is not constant on scattering orbits (max deviation {dev:.3e})"
        )

    def multiplier(X, V):
        energy = np.sum(V * V, axis=1)
        momentum = np.sum(V, axis=1)
        y = energy * np.sum(X, axis=1) - momentum * np.sum(X * V, axis=1)
        return np.asarray(f(y), dtype=float) * np.asarray(g(V), dtype=float)

    return MeasureSpec.from_multiplier(multiplier, label="factory")


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TestFunction:
    """Smooth compactly supported bump on phase space.

    ``phi(Z) = amplitude * exp(1 - 1/(1 - r^2))`` for ``r = |Z - center|/radius``
    below one, and zero outside; support control is exact.
    """

    center: PhasePoint
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.radius > 0 and self.amplitude > 0):
            raise InvalidInputError("radius and amplitude must be positive")

    def eval_batch(self, Z: np.ndarray) -> np.ndarray:
        c = self.center.as_array()
        r2 = np.sum((Z - c) ** 2, axis=1) / self.radius**2
        out = np.zeros(Z.shape[0])
        inside = r2 < 1.0
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out

    def __call__(self, z: PhasePoint) -> float:
        return float(self.eval_batch(z.as_array()[None, :])[0])


# ---------------------------------------------------------------------------
# single-point density operations
# ---------------------------------------------------------------------------

def surface_density(zeta: ChartPoint) -> float:
    """Area element of the chart at ``zeta`` (always taken non-negative).

    The closed form is
    ``((u1-u2)^2 + (x1-x2)^2)^((N-2)/2) / |x1-x2|^(N-1) * sqrt(sum (x_i-x_j)^2)``;
    the absolute value matches sqrt(det Gram), which is intrinsically
    non-negative, while the raw closed form is signed for even N.
    """
    return float(
        _omega_batch(zeta.x[None, :], zeta.u[:1], zeta.u[1:2])[0]
    )


def gram_density_oracle(zeta: ChartPoint, step: float = 1e-6) -> float:
    """Finite-difference ``sqrt(det(DPsi^T DPsi))``, the area-element oracle."""
    n = zeta.n

    def chart(arr):
        x, u = arr[:n], arr[n:]
        v = ((x - x[1]) * u[0] - (x - x[0]) * u[1]) / (x[0] - x[1])
        return np.concatenate([x, v])

    jac = central_jacobian(chart, zeta.as_array(), step)
    gram = jac.T @ jac
    det = float(np.linalg.det(gram))
    if det <= 0 or np.linalg.cond(gram) > 1e12:
        warnings.warn(
            "near-singular Gram matrix; the finite-difference area element "
            "is ill-conditioned here",
            RuntimeWarning,
        )
    return math.sqrt(max(det, 0.0))


def liouville_density(z: PhasePoint, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Canonical invariant density at a manifold point; infinite on the
    boundary stratum where some pair has equal positions and velocities."""
    if not on_manifold(z, tol):
        raise NotOnManifoldError("point fails the collinearity test")
    iu, ju = _triu(z.n)
    q = (z.v[iu] - z.v[ju]) ** 2 + (z.x[iu] - z.x[ju]) ** 2
    if np.any(q == 0.0):
        return math.inf
    expo = (z.n - 2) / (z.n * (z.n - 1))
    return float(np.exp(-expo * np.sum(np.log(q))))


# ---------------------------------------------------------------------------
# integration region and MC configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChartRegion:
    """A product box in chart coordinates with exclusion margins.

    The integration region is the subset of the box whose positions are
    ordered with every adjacent gap at least ``margin_x`` and whose velocity
    pair satisfies ``|u1 - u2| >= margin_u``; the margins keep the region
    strictly inside the chart domain, away from the strata where the
    canonical density or the chart itself degenerates.  The box intervals may
    overlap: samples outside the margins are zeroed rather than rejected, so
    the estimator stays unbiased for the region integral.
    """

    x_bounds: tuple
    u_bounds: tuple
    margin_x: float = 0.05
    margin_u: float = 0.05

    def __post_init__(self):
        xb = tuple((float(lo), float(hi)) for lo, hi in self.x_bounds)
        ub = tuple((float(lo), float(hi)) for lo, hi in self.u_bounds)
        object.__setattr__(self, "x_bounds", xb)
        object.__setattr__(self, "u_bounds", ub)
        if len(ub) != 2:
            raise InvalidInputError("u_bounds must give two intervals")
        if len(xb) < 3:
            raise InvalidInputError("at least 3 position intervals are needed")
        for lo, hi in xb + ub:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise InvalidInputError("region intervals must satisfy lo < hi")
        if not (self.margin_x > 0 and self.margin_u > 0):
            raise InvalidInputError("margins must be positive")

    @property
    def n(self) -> int:
        return len(self.x_bounds)

    @property
    def volume(self) -> float:
        vol = 1.0
        for lo, hi in self.x_bounds + self.u_bounds:
            vol *= hi - lo
        return vol

    def membership(self, X: np.ndarray, u1: np.ndarray,
                   u2: np.ndarray) -> np.ndarray:
        """Margin mask for points already inside the box."""
        gaps_ok = np.min(np.diff(X, axis=1), axis=1) >= self.margin_x
        return gaps_ok & (np.abs(u1 - u2) >= self.margin_u)

    def sample(self, rng, m: int):
        """Uniform draws over the box; returns (X, u1, u2, in_region)."""
        n = self.n
        raw = rng.random((m, n + 2))
        lo = np.array([b[0] for b in self.x_bounds + self.u_bounds])
        hi = np.array([b[1] for b in self.x_bounds + self.u_bounds])
        pts = lo + raw * (hi - lo)
        X, u1, u2 = pts[:, :n], pts[:, n], pts[:, n + 1]
        return X, u1, u2, self.membership(X, u1, u2)

    def to_dict(self) -> dict:
        return {
            "x_bounds": [list(b) for b in self.x_bounds],
            "u_bounds": [list(b) for b in self.u_bounds],
            "margin_x": self.margin_x,
            "margin_u": self.margin_u,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChartRegion":
        try:
            return cls(
                x_bounds=tuple(tuple(b) for b in data["x_bounds"]),
                u_bounds=tuple(tuple(b) for b in data["u_bounds"]),
                margin_x=float(data.get("margin_x", 0.05)),
                margin_u=float(data.get("margin_u", 0.05)),
            )
        except KeyError as err:
            raise InvalidInputError(f"region config missing key {err}") from err


@dataclass(frozen=True, eq=False)
class MCConfig:
    """Monte Carlo configuration with worker-count-independent substreams.

    Samples are generated in fixed blocks of ``block_size``; block ``b`` uses
    the substream seeded by ``(seed, b)``, and block results are reduced in
    block order, so estimates are bitwise independent of ``workers``.
    """

    region: ChartRegion
    n_samples: int
    seed: int
    workers: int = 1
    block_size: int = 1 << 16
    check_samples: int = 20000
    check_pad: float | None = None

    def __post_init__(self):
        if self.n_samples < 1000:
            raise InvalidInputError("n_samples must be at least 10^3")
        if self.seed < 0:
            raise InvalidInputError("seed must be a non-negative integer")
        if self.workers < 1 or self.block_size < 1:
            raise InvalidInputError("workers and block_size must be positive")


# ---------------------------------------------------------------------------
# the estimator
# ---------------------------------------------------------------------------

def _integrand(measure: MeasureSpec, phi: TestFunction, transform,
               region: ChartRegion, X, u1, u2, in_region):
    # masked-out rows may sit on degenerate strata; their values are zeroed,
    # so non-finite intermediates there are harmless
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        V = _psi_batch(X, u1, u2)
        rho = measure.density_batch(X, V)
        w = _omega_batch(X, u1, u2)
        if transform is not None:
            map_, t = transform
            Xe, Ve = _flow_batch(map_, X, V, float(t))
        else:
            Xe, Ve = X, V
        phi_vals = phi.eval_batch(np.hstack([Xe, Ve]))
        vals = np.where(in_region, phi_vals * rho * w, 0.0)
    if not np.all(np.isfinite(vals[in_region])):
        raise InvalidDensityError(
            "density is singular inside the region; configure margins"
        )
    return vals


def _coverage_check(phi: TestFunction, cfg: MCConfig, transform) -> None:
    """Abort when the transformed test function has support outside the region.

    A shell around the box (and the excluded diagonal strip inside it) is
    sampled; any point there carrying transformed bump mass means the region
    is too small for the requested estimate.
    """
    region = cfg.region
    n = region.n
    t_abs = abs(float(transform[1])) if transform is not None else 0.0
    u_mag = max(abs(b) for iv in region.u_bounds for b in iv)
    if cfg.check_pad is not None:
        pad_x = pad_u = cfg.check_pad
    else:
        width_x = max(hi - lo for lo, hi in region.x_bounds)
        width_u = max(hi - lo for lo, hi in region.u_bounds)
        pad_x = 0.5 * width_x + t_abs * u_mag + 0.1
        pad_u = 0.5 * width_u + 0.1
    lo = np.array(
        [b[0] - pad_x for b in region.x_bounds]
        + [b[0] - pad_u for b in region.u_bounds]
    )
    hi = np.array(
        [b[1] + pad_x for b in region.x_bounds]
        + [b[1] + pad_u for b in region.u_bounds]
    )
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0x5E11)))
    pts = lo + rng.random((cfg.check_samples, n + 2)) * (hi - lo)
    X, u1, u2 = pts[:, :n], pts[:, n], pts[:, n + 1]
    # only strictly ordered configurations are chart points at all
    ordered = np.all(np.diff(X, axis=1) > 0, axis=1)
    in_box = np.ones(pts.shape[0], dtype=bool)
    for k, (blo, bhi) in enumerate(region.x_bounds + region.u_bounds):
        in_box &= (pts[:, k] >= blo) & (pts[:, k] <= bhi)
    in_region = in_box & region.membership(X, u1, u2)
    shell = ordered & ~in_region & (u1 != u2)
    if not np.any(shell):
        return
    X, u1, u2 = X[shell], u1[shell], u2[shell]
    V = _psi_batch(X, u1, u2)
    if transform is not None:
        map_, t = transform
        Xe, Ve = _flow_batch(map_, X, V, float(t))
    else:
        Xe, Ve = X, V
    phi_vals = phi.eval_batch(np.hstack([Xe, Ve]))
    if np.any(phi_vals > phi.amplitude * 1e-12):
        raise RegionTooSmallError(
            "test-function support reaches outside the integration region"
        )


def integrate(measure: MeasureSpec, phi: TestFunction, cfg: MCConfig,
              transform=None, support_check: bool = True):
    """MC estimate of ``<mu, Phi>`` or, with ``transform=(map, t)``, of the
    pushforward pairing ``<T^t # mu, Phi>``.

    Returns ``(estimate, stderr)``.  The estimate is
    ``vol(region) * mean(Phi(T(Psi(zeta))) rho(Psi(zeta)) omega(zeta))`` over
    uniform draws from the chart box (integrand zeroed on the excluded
    diagonal strip).
    """
    if support_check:
        _coverage_check(phi, cfg, transform)

    blocks = []
    remaining = cfg.n_samples
    b = 0
    while remaining > 0:
        size = min(cfg.block_size, remaining)
        blocks.append((b, size))
        remaining -= size
        b += 1

    def eval_block(args):
        idx, size = args
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, idx)))
        X, u1, u2, in_region = cfg.region.sample(rng, size)
        vals = _integrand(measure, phi, transform, cfg.region, X, u1, u2,
                          in_region)
        return float(np.sum(vals)), float(np.sum(vals * vals))

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(eval_block, blocks))
    else:
        results = [eval_block(blk) for blk in blocks]

    # fixed-order reduction: independent of worker count
    total = 0.0
    total_sq = 0.0
    for s, ss in results:
        total += s
        total_sq += ss
    n = cfg.n_samples
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    vol = cfg.region.volume
    return vol * mean, vol * math.sqrt(var / n)


@dataclass(frozen=True, eq=False)
class InvarianceReport:
    """Two-sample comparison of ``<mu, Phi>`` against ``<T^t # mu, Phi>``."""

    center: tuple
    radius: float
    i0: float
    it: float
    se0: float
    se_t: float
    z_score: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "center": list(self.center),
            "radius": self.radius,
            "i0": self.i0,
            "it": self.it,
            "se0": self.se0,
            "set": self.se_t,
            "z": self.z_score,
            "verdict": self.verdict,
        }


def invariance_report(measure: MeasureSpec, map_: ScatteringMap, t: float,
                      phis, cfg: MCConfig, z_invariant: float = 4.0,
                      z_violated: float = 10.0) -> list[InvarianceReport]:
    """Estimate both pairings for each test function and attach a verdict.

    ``invariant`` when the discrepancy is within ``z_invariant`` combined
    standard errors, ``violated`` beyond ``z_violated``, else
    ``inconclusive``.
    """
    reports = []
    for phi in phis:
        i0, se0 = integrate(measure, phi, cfg, transform=None)
        it, se_t = integrate(measure, phi, cfg, transform=(map_, t))
        z = abs(it - i0) / math.sqrt(se0**2 + se_t**2)
        if z <= z_invariant:
            verdict = "invariant"
        elif z >= z_violated:
            verdict = "violated"
        else:
            verdict = "inconclusive"
        reports.append(
            InvarianceReport(
                center=tuple(phi.center.as_array().tolist()),
                radius=phi.radius,
                i0=i0,
                it=it,
                se0=se0,
                se_t=se_t,
                z_score=z,
                verdict=verdict,
            )
        )
    return reports


# ---------------------------------------------------------------------------
# functional equation of shift-invariant multipliers
# ---------------------------------------------------------------------------

def sample_chart_points(n: int, dim: int, rng, x_span=(-2.0, 2.0),
                        gap: float = 0.05, u_span=(-2.0, 2.0),
                        u_gap: float = 0.05, side: str = "both"):
    """Random interior chart points; returns (X, U) arrays.

    Positions are uniform in ``x_span`` sorted increasingly with adjacent
    gaps at least ``gap``; the velocity pair is uniform in ``u_span`` with
    ``|u1 - u2| >= u_gap``.  ``side`` restricts the sign of ``u1 - u2``
    (``"pre"``: approaching, ``"post"``: receding).
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    X = np.empty((n, dim))
    U = np.empty((n, 2))
    filled = 0
    while filled < n:
        m = max(n - filled, 64)
        xs = np.sort(rng.uniform(*x_span, size=(m, dim)), axis=1)
        us = rng.uniform(*u_span, size=(m, 2))
        ok = np.min(np.diff(xs, axis=1), axis=1) >= gap
        du = us[:, 0] - us[:, 1]
        if side == "pre":
            ok &= du >= u_gap
        elif side == "post":
            ok &= -du >= u_gap
        else:
            ok &= np.abs(du) >= u_gap
        take = min(int(np.sum(ok)), n - filled)
        X[filled:filled + take] = xs[ok][:take]
        U[filled:filled + take] = us[ok][:take]
        filled += take
    return X, U


def functional_equation_check(spec: MeasureSpec, n_samples: int = 10000,
                              t_values=(-2.0, 0.7), seed: int = 0,
                              dim: int = 3) -> float:
    """Max deviation of the multiplier under position shifts ``X -> X - tV``.

    Multipliers of invariant measures are constant along free flight; the
    returned value is ``max |m(X - tV, V) - m(X, V)|`` over random interior
    manifold points and the supplied times.
    """
    if spec.kind == "hausdorff":
        raise InvalidInputError("the check applies to multiplier-form measures")
    X, U = sample_chart_points(n_samples, dim, np.random.default_rng(seed))
    V = _psi_batch(X, U[:, 0], U[:, 1])
    base = spec.multiplier_batch(X, V)
    worst = 0.0
    for t in t_values:
        shifted = spec.multiplier_batch(X - float(t) * V, V)
        worst = max(worst, float(np.max(np.abs(shifted - base))))
    return worst


# ---------------------------------------------------------------------------
# deterministic fine-grid oracle
# ---------------------------------------------------------------------------

def grid_integral(measure: MeasureSpec, phi: TestFunction, region: ChartRegion,
                  resolution: int, transform=None,
                  chunk: int = 1 << 18) -> float:
    """Midpoint-rule value of the same integrand the MC estimator samples.

    Deterministic and mesh-converging; doubling ``resolution`` supports a
    Richardson consistency check.  Cost grows like ``resolution^(N+2)``.
    """
    n = region.n
    dims = n + 2
    bounds = region.x_bounds + region.u_bounds
    los = np.array([b[0] for b in bounds])
    widths = np.array([b[1] - b[0] for b in bounds])
    h = widths / resolution
    total_cells = resolution**dims
    cell_vol = float(np.prod(h))
    acc = 0.0
    for start in range(0, total_cells, chunk):
        idx = np.arange(start, min(start + chunk, total_cells))
        coords = np.empty((idx.size, dims))
        rem = idx
        for d in range(dims - 1, -1, -1):
            coords[:, d] = rem % resolution
            rem = rem // resolution
        pts = los + (coords + 0.5) * h
        X, u1, u2 = pts[:, :n], pts[:, n], pts[:, n + 1]
        in_region = region.membership(X, u1, u2)
        vals = _integrand(measure, phi, transform, region, X, u1, u2,
                          in_region)
        acc += float(np.sum(vals))
    return acc * cell_vol

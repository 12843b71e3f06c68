"""Scattering maps at the simultaneous collision.

A scattering map sends pre-collisional velocities (non-increasing components)
to post-collisional ones (non-decreasing).  The canonical linear map is
``(2/N) ones*ones^T - I``: an orthogonal involution that fixes the constant
vector and negates every pairwise difference.  Maps are judged against the
Jacobian equation ``det(Dsigma(V)) = +/- H(V)/H(sigma(V))`` with the weight

    H(W) = (sum_{i<j} (w_i-w_j)^2)^(1/2) / (prod_{i<j} (w_i-w_j)^2)^((N-2)/(N(N-1))),

whose residual decides whether the flow generated by the map preserves the
weighted surface measure on the collision manifold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    DomainViolationError,
    InvalidInputError,
    SingularWeightError,
    StepTooLargeError,
)
from .geometry import cone_membership, conserved_quantities
from .numdiff import central_jacobian

__all__ = [
    "ScatteringMap",
    "LinearScatteringMap",
    "CustomScatteringMap",
    "sigma_star_matrix",
    "sigma_star_via_spectral",
    "sigma_star",
    "reversal",
    "negation",
    "builtin_map",
    "load_linear_map",
    "apply",
    "h_weight",
    "finite_diff_jacobian",
    "pde_residual",
    "conservation_check",
    "admissibility_check",
    "sample_pre_cone",
    "PdeResidualReport",
    "ConservationReport",
    "AdmissibilityReport",
    "BUILTIN_NAMES",
]

BUILTIN_NAMES = ("sigma-star", "reversal", "negation")


# ---------------------------------------------------------------------------
# exact rational helpers (small matrices only)
# ---------------------------------------------------------------------------

def _frac_matmul(a, b):
    n = len(a)
    return [
        [sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
        for i in range(n)
    ]


def _frac_det(a):
    # fraction-exact Gaussian elimination; fine for the small n used here
    n = len(a)
    m = [row[:] for row in a]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor:
                m[r] = [m[r][j] - factor * m[col][j] for j in range(n)]
    return det


def _frac_identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# map classes
# ---------------------------------------------------------------------------

class ScatteringMap:
    """Common interface: evaluation, inverse, and (optional) Jacobian."""

    name = "scattering"
    requires_interior = False

    def _raw_apply(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _raw_inverse(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def inverse_is_derived(self) -> bool:
        """True if the inverse is synthesised from sigma^{-1}(V) = -sigma(-V)."""
        return False

    def apply(self, v, check_domain: bool = True) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if check_domain:
            margin = 0.0
            if self.requires_interior:
                margin = np.finfo(float).tiny
            if not cone_membership(v, "pre", margin=margin):
                raise DomainViolationError(
                    f"{self.name}: velocity is not pre-collisional"
                )
        return self._raw_apply(v)

    def apply_batch(self, V: np.ndarray) -> np.ndarray:
        """Row-wise evaluation on an (m, n) array, no domain checks."""
        return np.stack([self._raw_apply(row) for row in np.asarray(V, float)])

    def inverse_apply(self, v, check_domain: bool = True) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if check_domain and not cone_membership(v, "post"):
            raise DomainViolationError(
                f"{self.name}: velocity is not post-collisional"
            )
        return self._raw_inverse(v)

    def inverse_batch(self, V: np.ndarray) -> np.ndarray:
        return np.stack([self._raw_inverse(row) for row in np.asarray(V, float)])

    def jacobian(self, v) -> np.ndarray | None:
        """Analytic Jacobian at v, or None when only FD is available."""
        return None

    @property
    def has_analytic_jacobian(self) -> bool:
        return self._has_jac()

    def _has_jac(self) -> bool:
        return False


class LinearScatteringMap(ScatteringMap):
    """Scattering map given by an invertible matrix, ``sigma(V) = A V``.

    When every entry is supplied exactly (built-ins, integer/decimal-string
    JSON input) an exact rational copy of the matrix is kept alongside the
    float one, so conservation and involution verdicts can be exact.
    """

    def __init__(self, matrix, name: str = "linear", exact=None):
        self.matrix = np.asarray(matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise InvalidInputError("scattering matrix must be square")
        if not np.all(np.isfinite(self.matrix)):
            raise InvalidInputError("scattering matrix has non-finite entries")
        if abs(np.linalg.det(self.matrix)) < 1e-12:
            raise InvalidInputError("scattering matrix must be invertible")
        self.name = name
        self.exact = exact  # list-of-lists of Fractions, or None
        self._inv = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def _raw_apply(self, v):
        return self.matrix @ v

    def apply_batch(self, V):
        return np.asarray(V, float) @ self.matrix.T

    def _inverse_matrix(self):
        if self._inv is None:
            self._inv = np.linalg.inv(self.matrix)
        return self._inv

    def _raw_inverse(self, v):
        return self._inverse_matrix() @ v

    def inverse_batch(self, V):
        return np.asarray(V, float) @ self._inverse_matrix().T

    def jacobian(self, v):
        return self.matrix

    def _has_jac(self):
        return True

    # -- exact structural verdicts -------------------------------------

    def conserves_momentum_exactly(self) -> bool:
        """Momentum is conserved for all inputs iff A^T ones = ones."""
        if self.exact is not None:
            return all(
                sum(self.exact[i][j] for i in range(self.n)) == 1
                for j in range(self.n)
            )
        resid = self.matrix.T @ np.ones(self.n) - 1.0
        return bool(np.max(np.abs(resid)) <= 64 * np.finfo(float).eps * self.n)

    def conserves_energy_exactly(self) -> bool:
        """Energy is conserved for all inputs iff A^T A = I."""
        if self.exact is not None:
            at = [list(col) for col in zip(*self.exact)]
            return _frac_matmul(at, self.exact) == _frac_identity(self.n)
        resid = self.matrix.T @ self.matrix - np.eye(self.n)
        return bool(np.max(np.abs(resid)) <= 64 * np.finfo(float).eps * self.n)

    def is_involution_exactly(self) -> bool:
        if self.exact is not None:
            return _frac_matmul(self.exact, self.exact) == _frac_identity(self.n)
        resid = self.matrix @ self.matrix - np.eye(self.n)
        return bool(np.max(np.abs(resid)) <= 64 * np.finfo(float).eps * self.n)

    def exact_det(self) -> Fraction | None:
        return _frac_det(self.exact) if self.exact is not None else None

    def cone_report(self) -> dict:
        """Exact facet verdicts for the cone-mapping contract.

        The pre-collisional cone is generated by the prefix indicator vectors
        ``p_k = e_1 + ... + e_k`` together with the line spanned by ``ones``,
        so ``A`` maps it into the post-collisional cone iff ``A ones`` is a
        constant vector and every ``A p_k`` is non-decreasing; the onto half
        applies the same test to ``A^{-1}`` on the opposite cone.
        """
        n = self.n
        tol = 64 * np.finfo(float).eps * n
        ones_img = self.matrix @ np.ones(n)
        fixes_line = np.max(np.abs(ones_img - ones_img[0])) <= tol * max(
            1.0, abs(ones_img[0])
        )
        into = fixes_line
        for k in range(1, n):
            img = self.matrix @ np.concatenate([np.ones(k), np.zeros(n - k)])
            if not np.all(np.diff(img) >= -tol):
                into = False
                break
        inv = self._inverse_matrix()
        ones_pre = inv @ np.ones(n)
        onto = np.max(np.abs(ones_pre - ones_pre[0])) <= tol * max(
            1.0, abs(ones_pre[0])
        )
        for k in range(1, n):
            img = inv @ -np.concatenate([np.ones(k), np.zeros(n - k)])
            if not np.all(np.diff(img) <= tol):
                onto = False
                break
        return {"into": bool(into), "onto": bool(onto)}


class CustomScatteringMap(ScatteringMap):
    """User-supplied scattering map.

    ``func`` evaluates the map; ``inverse`` and ``jacobian`` are optional.
    A missing inverse is derived from the no-arrow-of-time identity
    ``sigma^{-1}(V) = -sigma(-V)``, which is only a true inverse for
    admissible maps; `admissibility_check` reports the discrepancy otherwise.
    Custom maps are only probed on the strict interior of their cone.
    """

    requires_interior = True

    def __init__(self, func, inverse=None, jacobian=None, name: str = "custom",
                 batch=None):
        self._func = func
        self._inverse = inverse
        self._jacobian = jacobian
        self._batch = batch
        self.name = name

    def _raw_apply(self, v):
        return np.asarray(self._func(v), dtype=float)

    def apply_batch(self, V):
        V = np.asarray(V, float)
        if self._batch is not None:
            return np.asarray(self._batch(V), dtype=float)
        return np.stack([self._raw_apply(row) for row in V])

    @property
    def inverse_is_derived(self) -> bool:
        return self._inverse is None

    def _raw_inverse(self, v):
        if self._inverse is not None:
            return np.asarray(self._inverse(v), dtype=float)
        return -self._raw_apply(-np.asarray(v, float))

    def jacobian(self, v):
        if self._jacobian is None:
            return None
        return np.asarray(self._jacobian(np.asarray(v, float)), dtype=float)

    def _has_jac(self):
        return self._jacobian is not None


# ---------------------------------------------------------------------------
# built-in maps
# ---------------------------------------------------------------------------

def sigma_star_matrix(n: int, exact: bool = False):
    """Matrix of the canonical linear map, ``(2/n) ones*ones^T - I``.

    With ``exact=True`` the entries are `fractions.Fraction` (diagonal
    ``2/n - 1``, off-diagonal ``2/n``) collected in a list of rows.
    """
    if n < 3:
        raise InvalidInputError("the canonical map needs n >= 3")
    if exact:
        off = Fraction(2, n)
        return [
            [off - 1 if i == j else off for j in range(n)] for i in range(n)
        ]
    return 2.0 / n * np.ones((n, n)) - np.eye(n)


def sigma_star_via_spectral(n: int) -> np.ndarray:
    """Rebuild the canonical matrix from its eigenstructure.

    Gram-Schmidt is run on ``{ones, e_1 - e_2, ..., e_{n-1} - e_n}`` and the
    matrix is assembled with eigenvalue +1 on the normalised constant vector
    and -1 on each orthonormalised difference direction.
    """
    if n < 3:
        raise InvalidInputError("the canonical map needs n >= 3")
    basis = np.zeros((n, n))
    basis[:, 0] = 1.0
    for i in range(n - 1):
        basis[i, i + 1] = 1.0
        basis[i + 1, i + 1] = -1.0
    q = np.zeros_like(basis)
    for k in range(n):
        vec = basis[:, k].copy()
        for j in range(k):
            vec -= np.dot(q[:, j], basis[:, k]) * q[:, j]
        q[:, k] = vec / np.linalg.norm(vec)
    out = np.outer(q[:, 0], q[:, 0])
    for k in range(1, n):
        out -= np.outer(q[:, k], q[:, k])
    return out


def sigma_star(n: int) -> LinearScatteringMap:
    """The unique momentum- and energy-conserving linear scattering map."""
    return LinearScatteringMap(
        sigma_star_matrix(n), name="sigma-star", exact=sigma_star_matrix(n, exact=True)
    )


def reversal(n: int) -> LinearScatteringMap:
    """Order-reversing permutation ``(v_1..v_n) -> (v_n..v_1)``.

    Linear, momentum- and energy-conserving, and an involution mapping the
    pre-cone onto the post-cone, yet different from the canonical map for
    n >= 3; it is kept as a fixture and reported as data.
    """
    if n < 3:
        raise InvalidInputError("n >= 3 required")
    exact = [[Fraction(int(j == n - 1 - i)) for j in range(n)] for i in range(n)]
    return LinearScatteringMap(np.eye(n)[::-1].copy(), name="reversal", exact=exact)


def negation(n: int) -> LinearScatteringMap:
    """Velocity reversal ``v -> -v``: conserves energy but not momentum."""
    if n < 3:
        raise InvalidInputError("n >= 3 required")
    exact = [[Fraction(-int(i == j)) for j in range(n)] for i in range(n)]
    return LinearScatteringMap(-np.eye(n), name="negation", exact=exact)


def builtin_map(name: str, n: int) -> LinearScatteringMap:
    key = name.replace("_", "-").lower()
    table = {"sigma-star": sigma_star, "reversal": reversal, "negation": negation}
    if key not in table:
        raise InvalidInputError(
            f"unknown builtin map {name!r}; expected one of {BUILTIN_NAMES}"
        )
    return table[key](n)


def load_linear_map(source, name: str | None = None) -> LinearScatteringMap:
    """Load a linear map from JSON ``{"n": int, "rows": [[...], ...]}``.

    Entries may be numbers or strings; strings are parsed exactly (decimal
    strings such as ``"0.5"`` and rationals such as ``"2/3"``), in which case
    the exact matrix is retained for the structural verdicts.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        with open(path) as fh:
            data = json.load(fh)
        if name is None:
            name = path.stem
    else:
        data = source
    if not isinstance(data, dict) or set(data) != {"n", "rows"}:
        raise InvalidInputError('matrix JSON must have exactly the keys "n", "rows"')
    n = data["n"]
    rows = data["rows"]
    if not isinstance(n, int) or n < 3:
        raise InvalidInputError('"n" must be an integer >= 3')
    if len(rows) != n or any(len(r) != n for r in rows):
        raise InvalidInputError(f'"rows" must be an {n}x{n} array')
    exact = []
    exact_ok = True
    for row in rows:
        erow = []
        for entry in row:
            if isinstance(entry, str):
                erow.append(Fraction(entry))
            elif isinstance(entry, int):
                erow.append(Fraction(entry))
            elif isinstance(entry, float):
                exact_ok = False
                erow.append(entry)
            else:
                raise InvalidInputError(f"bad matrix entry {entry!r}")
        exact.append(erow)
    matrix = np.array([[float(e) for e in row] for row in exact])
    return LinearScatteringMap(
        matrix, name=name or "linear", exact=exact if exact_ok else None
    )


def apply(map_: ScatteringMap, v) -> np.ndarray:
    """Evaluate a scattering map on a pre-collisional velocity vector."""
    return map_.apply(v)


# ---------------------------------------------------------------------------
# the velocity weight and the Jacobian-PDE residual
# ---------------------------------------------------------------------------

def _pair_diffs(W: np.ndarray) -> np.ndarray:
    iu, ju = np.triu_indices(W.shape[-1], k=1)
    return W[..., iu] - W[..., ju]


def h_weight(w) -> float:
    """Scale-covariant velocity weight entering the Jacobian equation."""
    w = np.asarray(w, dtype=float)
    d = _pair_diffs(w)
    if np.any(d == 0.0):
        raise SingularWeightError("repeated velocity component")
    n = w.size
    expo = (n - 2) / (n * (n - 1))
    return float(
        np.sqrt(np.sum(d * d)) * np.exp(-expo * np.sum(np.log(d * d)))
    )


def _h_weight_batch(W: np.ndarray):
    """Row-wise weight; returns (values, valid_mask)."""
    d = _pair_diffs(W)
    ok = np.all(d != 0.0, axis=-1)
    n = W.shape[-1]
    expo = (n - 2) / (n * (n - 1))
    dsq = np.where(ok[:, None], d * d, 1.0)
    vals = np.sqrt(np.sum(d * d, axis=-1)) * np.exp(
        -expo * np.sum(np.log(dsq), axis=-1)
    )
    return vals, ok


def _min_gap(v: np.ndarray) -> float:
    return float(np.min(v[:-1] - v[1:]))


def finite_diff_jacobian(map_: ScatteringMap, v, step: float) -> np.ndarray:
    """Central-difference Jacobian of the map at an interior cone point.

    All stencil points ``v +/- step e_k`` must stay inside the cone, which
    holds when every adjacent velocity gap exceeds the step.
    """
    v = np.asarray(v, dtype=float)
    if step <= 0:
        raise InvalidInputError("step must be positive")
    if _min_gap(v) <= step:
        raise StepTooLargeError(
            "finite-difference stencil would leave the pre-collisional cone"
        )
    return central_jacobian(lambda w: map_.apply(w, check_domain=False), v, step)


def _batch_jacobian_dets(map_: ScatteringMap, V: np.ndarray, step: float):
    """det(Dsigma) per row, analytic when the map provides it, else FD."""
    m, n = V.shape
    if isinstance(map_, LinearScatteringMap):
        return np.full(m, np.linalg.det(map_.matrix)), True
    if map_.has_analytic_jacobian:
        dets = np.array([np.linalg.det(map_.jacobian(row)) for row in V])
        return dets, True
    jac = np.empty((m, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = step
        jac[:, :, k] = (map_.apply_batch(V + e) - map_.apply_batch(V - e)) / (
            2.0 * step
        )
    return np.linalg.det(jac), False


@dataclass(frozen=True)
class PdeResidualReport:
    """Residuals of det(Dsigma) against +/- H(V)/H(sigma(V)), normalised by
    the weight ratio so the tolerance is scale-free."""

    max_abs_residual_plus: float
    max_abs_residual_minus: float
    chosen_sign: int | None
    samples: int
    skipped: int
    used_analytic_jacobian: bool

    def to_dict(self) -> dict:
        return {
            "max_abs_residual_plus": self.max_abs_residual_plus,
            "max_abs_residual_minus": self.max_abs_residual_minus,
            "chosen_sign": self.chosen_sign,
            "samples": self.samples,
            "skipped": self.skipped,
            "used_analytic_jacobian": self.used_analytic_jacobian,
        }


def pde_residual(map_: ScatteringMap, samples, step: float = 1e-6,
                 sign_threshold: float = 1e-4) -> PdeResidualReport:
    """Evaluate both sign branches of the Jacobian equation on samples.

    ``samples`` is an (m, n) array of strictly interior pre-collisional
    velocities.  Rows where either the input or the image has a repeated
    component are skipped and counted.  ``chosen_sign`` is the branch with
    the smaller maximal residual when that residual is below
    ``sign_threshold``, else None.
    """
    V = np.asarray(samples, dtype=float)
    if V.ndim != 2:
        raise InvalidInputError("samples must be an (m, n) array")
    W = map_.apply_batch(V)
    h_in, ok_in = _h_weight_batch(V)
    h_out, ok_out = _h_weight_batch(W)
    ok = ok_in & ok_out
    skipped = int(np.sum(~ok))
    if not np.any(ok):
        raise InvalidInputError("every sample hit a singular weight")
    dets, analytic = _batch_jacobian_dets(map_, V[ok], step)
    ratio = h_in[ok] / h_out[ok]
    res_plus = float(np.max(np.abs(dets - ratio) / ratio))
    res_minus = float(np.max(np.abs(dets + ratio) / ratio))
    chosen = None
    if min(res_plus, res_minus) <= sign_threshold:
        chosen = 1 if res_plus <= res_minus else -1
    return PdeResidualReport(
        max_abs_residual_plus=res_plus,
        max_abs_residual_minus=res_minus,
        chosen_sign=chosen,
        samples=int(np.sum(ok)),
        skipped=skipped,
        used_analytic_jacobian=analytic,
    )


# ---------------------------------------------------------------------------
# sampling and statistical checks
# ---------------------------------------------------------------------------

def sample_pre_cone(n_samples: int, dim: int, rng, gap: float = 1e-3,
                    scale: float = 1.0) -> np.ndarray:
    """Draw strictly interior pre-collisional velocities.

    I.i.d. standard normals are sorted into decreasing order and rows with
    any adjacent gap below ``gap`` are redrawn, keeping weights and Jacobians
    well conditioned.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    out = np.empty((n_samples, dim))
    filled = 0
    while filled < n_samples:
        draw = scale * rng.standard_normal((max(n_samples - filled, 64), dim))
        draw = -np.sort(-draw, axis=1)
        keep = draw[np.min(draw[:, :-1] - draw[:, 1:], axis=1) >= gap]
        take = min(keep.shape[0], n_samples - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


@dataclass(frozen=True)
class ConservationReport:
    max_rel_dev_momentum: float
    max_rel_dev_energy: float
    facet_momentum: bool | None
    facet_energy: bool | None
    samples: int

    @property
    def conserving(self) -> bool:
        if self.facet_momentum is not None and self.facet_energy is not None:
            return self.facet_momentum and self.facet_energy
        return max(self.max_rel_dev_momentum, self.max_rel_dev_energy) <= 1e-12

    def to_dict(self) -> dict:
        return {
            "max_rel_dev_momentum": self.max_rel_dev_momentum,
            "max_rel_dev_energy": self.max_rel_dev_energy,
            "facet_momentum": self.facet_momentum,
            "facet_energy": self.facet_energy,
            "samples": self.samples,
            "conserving": self.conserving,
        }


def conservation_check(map_: ScatteringMap, n_samples: int = 1000,
                       seed: int = 0) -> ConservationReport:
    """Sampled momentum/energy drift, plus exact verdicts for linear maps.

    Relative deviations are measured against ``max(|P|, sqrt(E))`` for the
    momentum (which may vanish) and against ``E`` for the energy.
    """
    rng = np.random.default_rng(seed)
    dim = getattr(map_, "n", None) or 3
    V = sample_pre_cone(n_samples, dim, rng)
    W = map_.apply_batch(V)
    p_in, p_out = np.sum(V, axis=1), np.sum(W, axis=1)
    e_in, e_out = np.sum(V * V, axis=1), np.sum(W * W, axis=1)
    dev_p = np.abs(p_out - p_in) / np.maximum(np.abs(p_in), np.sqrt(e_in))
    dev_e = np.abs(e_out - e_in) / e_in
    facet_p = facet_e = None
    if isinstance(map_, LinearScatteringMap):
        facet_p = map_.conserves_momentum_exactly()
        facet_e = map_.conserves_energy_exactly()
    return ConservationReport(
        max_rel_dev_momentum=float(np.max(dev_p)),
        max_rel_dev_energy=float(np.max(dev_e)),
        facet_momentum=facet_p,
        facet_energy=facet_e,
        samples=n_samples,
    )


@dataclass(frozen=True)
class AdmissibilityReport:
    max_abs_deviation: float
    samples: int
    inverse_is_derived: bool

    @property
    def admissible(self) -> bool:
        return not self.inverse_is_derived and self.max_abs_deviation <= 1e-12

    def to_dict(self) -> dict:
        return {
            "max_abs_deviation": self.max_abs_deviation,
            "samples": self.samples,
            "inverse_is_derived": self.inverse_is_derived,
            "admissible": self.admissible,
        }


def admissibility_check(map_: ScatteringMap, n_samples: int = 1000,
                        seed: int = 0) -> AdmissibilityReport:
    """Sampled check of the no-arrow-of-time identity sigma^{-1}(V) = -sigma(-V).

    Maps whose inverse is itself derived from that identity trivially report
    zero; the flag in the report makes that visible.
    """
    rng = np.random.default_rng(seed)
    dim = getattr(map_, "n", None) or 3
    V_plus = -sample_pre_cone(n_samples, dim, rng)
    dev = map_.inverse_batch(V_plus) + map_.apply_batch(-V_plus)
    return AdmissibilityReport(
        max_abs_deviation=float(np.max(np.abs(dev))),
        samples=n_samples,
        inverse_is_derived=map_.inverse_is_derived,
    )


def conservation_summary(map_: ScatteringMap, v) -> dict:
    """Before/after momentum-energy bookkeeping for a single application."""
    v = np.asarray(v, dtype=float)
    w = map_.apply(v)
    p_in, e_in = conserved_quantities(v)
    p_out, e_out = conserved_quantities(w)
    return {
        "input": v.tolist(),
        "output": w.tolist(),
        "momentum_before": p_in,
        "momentum_after": p_out,
        "energy_before": e_in,
        "energy_after": e_out,
        "input_precollisional": cone_membership(v, "pre"),
        "output_postcollisional": cone_membership(w, "post"),
    }

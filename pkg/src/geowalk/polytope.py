"""Polytope representation and log-barrier local geometry.

A polytope is the open set {x : Ax > b}.  The log barrier
phi(x) = -sum_i log(a_i^T x - b_i) turns its interior into a Riemannian
manifold with metric g(x) = A_x^T A_x, where A_x = S_x^{-1} A and
s_x = Ax - b is the slack vector.  ManifoldPoint caches every local
quantity the sampler needs: slack, rescaled constraints, Cholesky factor
of the metric, leverage scores sigma_x = diag(A_x (A_x^T A_x)^{-1} A_x^T)
and the drift mu(x) = (A_x^T A_x)^{-1} A_x^T sigma_x.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class PolytopeError(ValueError):
    """Invalid polytope data: bad dimensions, rank deficiency, non-finite entries."""


class InteriorError(PolytopeError):
    """Point is not strictly inside the polytope, or too close to the boundary."""


class FactorizationError(PolytopeError):
    """SPD factorization of the metric failed (numerically on the boundary)."""


class CenteringError(PolytopeError):
    """Analytic-center iteration failed to converge (polytope unbounded or empty)."""


@dataclass(frozen=True)
class Tolerances:
    """Numeric guards shared by the polytope layer.

    min_slack_factor: points with min slack below this times max(1, ||b||_inf)
        are rejected by make_point to avoid catastrophic cancellation.
    center_grad_tol: Newton decrement ||grad phi||_{g^{-1}} at which
        analytic_center stops.
    center_max_iter: iteration cap; hitting it signals unbounded-or-empty.
    rank_rtol: relative singular-value cutoff for the column-rank check.
    """

    min_slack_factor: float = 1e-12
    center_grad_tol: float = 1e-8
    center_max_iter: int = 200
    rank_rtol: float = 1e-10


DEFAULT_TOLS = Tolerances()


class Polytope:
    """The open polytope {x : Ax > b}, immutable after construction.

    A is m x n with full column rank and m >= n >= 1; rows are constraint
    normals, b the offsets.
    """

    def __init__(self, A, b, name=None, tols: Tolerances = DEFAULT_TOLS):
        A = np.ascontiguousarray(A, dtype=float)
        b = np.ascontiguousarray(b, dtype=float)
        if A.ndim != 2 or b.ndim != 1:
            raise PolytopeError(f"A must be 2-D and b 1-D, got {A.ndim}-D and {b.ndim}-D")
        m, n = A.shape
        if b.shape[0] != m:
            raise PolytopeError(f"A has {m} rows but b has {b.shape[0]} entries")
        if n < 1 or m < n:
            raise PolytopeError(f"need m >= n >= 1, got m={m}, n={n}")
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise PolytopeError("A and b must be finite")
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] <= tols.rank_rtol * sv[0]:
            raise PolytopeError("A is rank deficient (column rank < n)")
        self.A = A
        self.b = b
        self.m = m
        self.n = n
        self.name = name
        self.tols = tols
        self._slack_floor = tols.min_slack_factor * max(1.0, float(np.abs(b).max()))

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"Polytope(m={self.m}, n={self.n}{tag})"

    def slack(self, x):
        """Slack vector Ax - b."""
        return self.A @ x - self.b

    def contains(self, x) -> bool:
        """True iff x is strictly interior (all slacks positive)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise PolytopeError(f"point has shape {x.shape}, expected ({self.n},)")
        return bool(np.all(self.A @ x - self.b > 0.0))


def load_polytope(source) -> Polytope:
    """Build a Polytope from a JSON document {"A": [[...]], "b": [...], "name"?: str}.

    `source` may be a path, an open file object, or an already-parsed dict.
    """
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source) as fh:
            doc = json.load(fh)
    if "A" not in doc or "b" not in doc:
        raise PolytopeError("polytope document needs fields 'A' and 'b'")
    return Polytope(np.array(doc["A"], dtype=float), np.array(doc["b"], dtype=float),
                    name=doc.get("name"))


def contains(P: Polytope, x) -> bool:
    return P.contains(x)


def hypercube(n: int, half_width: float = 1.0) -> Polytope:
    """Axis-aligned box [-w, w]^n as 2n rows (+-e_i, b = -w)."""
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = np.full(2 * n, -half_width)
    return Polytope(A, b, name=f"box{n}")


def box(lo, hi) -> Polytope:
    """Axis-aligned box prod_i (lo_i, hi_i)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.size
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = np.concatenate([lo, -hi])
    return Polytope(A, b, name=f"box{n}")


def simplex(n: int) -> Polytope:
    """Standard open simplex {x > 0, sum x < 1} as n+1 rows."""
    A = np.vstack([np.eye(n), -np.ones((1, n))])
    b = np.concatenate([np.zeros(n), [-1.0]])
    return Polytope(A, b, name=f"simplex{n}")


class ManifoldPoint:
    """Interior point with cached log-barrier local geometry.

    Use make_point() to construct; the constructor assumes x was validated.
    Leverage scores, drift and logdet are computed lazily since geodesic
    integration only needs the metric solve.
    """

    __slots__ = ("polytope", "x", "slack", "A_x", "metric", "chol", "_chol_inv",
                 "_metric_inv", "_leverage", "_drift", "_log_det")

    def __init__(self, polytope: Polytope, x, slack):
        self.polytope = polytope
        self.x = x
        self.slack = slack
        self.A_x = polytope.A / slack[:, None]
        self.metric = self.A_x.T @ self.A_x
        try:
            self.chol = np.linalg.cholesky(self.metric)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(
                f"metric factorization failed (min slack {slack.min():.3e})") from exc
        self._chol_inv = None
        self._metric_inv = None
        self._leverage = None
        self._drift = None
        self._log_det = None

    @property
    def n(self) -> int:
        return self.polytope.n

    @property
    def chol_inv(self):
        """L^{-1} for g = L L^T (lower triangular)."""
        if self._chol_inv is None:
            self._chol_inv = np.linalg.inv(self.chol)
        return self._chol_inv

    @property
    def metric_inv(self):
        if self._metric_inv is None:
            li = self.chol_inv
            self._metric_inv = li.T @ li
        return self._metric_inv

    @property
    def leverage(self):
        """sigma_x = diag(A_x g^{-1} A_x^T), without forming the m x m projection."""
        if self._leverage is None:
            Y = self.chol_inv @ self.A_x.T  # L^{-1} A_x^T, n solves in one sweep
            self._leverage = np.einsum("ij,ij->j", Y, Y)
        return self._leverage

    @property
    def drift(self):
        """mu(x) = g^{-1} A_x^T sigma_x."""
        if self._drift is None:
            self._drift = self.metric_inv @ (self.A_x.T @ self.leverage)
        return self._drift

    @property
    def log_det_metric(self) -> float:
        """log det g(x) from the Cholesky diagonal."""
        if self._log_det is None:
            self._log_det = 2.0 * float(np.log(np.diag(self.chol)).sum())
        return self._log_det

    def solve_metric(self, rhs):
        """g(x)^{-1} rhs for a vector or stacked columns."""
        return self.metric_inv @ rhs

    def slack_velocity(self, v):
        """s_{x,v} = A_x v, the slack-space image of a tangent vector."""
        return self.A_x @ v

    def project(self, y):
        """P_x y = A_x g^{-1} A_x^T y without forming P_x."""
        return self.A_x @ (self.metric_inv @ (self.A_x.T @ y))

    def metric_inner(self, u, v) -> float:
        """<u, v>_x = u^T g(x) v."""
        return float((self.A_x @ u) @ (self.A_x @ v))

    def metric_norm(self, v) -> float:
        return float(np.linalg.norm(self.A_x @ v))

    def __repr__(self):
        return f"ManifoldPoint(x={self.x!r})"


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector in Euclidean coordinates attached to a base point."""

    v: np.ndarray
    base: ManifoldPoint

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.shape != (self.base.n,):
            raise PolytopeError(f"tangent vector has shape {v.shape}, "
                                f"expected ({self.base.n},)")
        object.__setattr__(self, "v", v)

    def norm(self) -> float:
        return self.base.metric_norm(self.v)

    def inner(self, other: "TangentVector") -> float:
        return self.base.metric_inner(self.v, other.v)


def make_point(P: Polytope, x) -> ManifoldPoint:
    """Validate the point and cache its local geometry.

    Raises InteriorError when x is outside or within the near-boundary guard,
    FactorizationError when the metric cannot be factorized.
    """
    x = np.ascontiguousarray(x, dtype=float)
    if x.shape != (P.n,):
        raise PolytopeError(f"point has shape {x.shape}, expected ({P.n},)")
    s = P.A @ x - P.b
    if not np.all(s > 0.0):
        raise InteriorError(f"point not strictly interior (min slack {s.min():.3e})")
    if s.min() < P._slack_floor:
        raise InteriorError(
            f"point too close to the boundary (min slack {s.min():.3e} "
            f"< guard {P._slack_floor:.3e})")
    return ManifoldPoint(P, x, s)


def drift(p: ManifoldPoint) -> np.ndarray:
    return p.drift


def metric_inner(p: ManifoldPoint, u, v) -> float:
    return p.metric_inner(u, v)


def log_det_metric(p: ManifoldPoint) -> float:
    return p.log_det_metric


def _newton_center(P: Polytope, x, shift: float, grad_tol: float, max_iter: int):
    """Damped Newton on the (possibly shifted) barrier -sum log(s_i + shift).

    Returns (x, decrement); assumes all s_i + shift > 0 at entry.
    """
    for _ in range(max_iter):
        s = P.A @ x - P.b + shift
        A_x = P.A / s[:, None]
        grad = -A_x.sum(axis=0)
        g = A_x.T @ A_x
        try:
            L = np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise CenteringError("barrier Hessian not positive definite") from exc
        li = np.linalg.inv(L)
        step = -(li.T @ (li @ grad))
        dec = float(np.sqrt(max(0.0, -grad @ step)))
        if dec <= grad_tol:
            return x, dec
        t = 1.0 if dec < 0.25 else 1.0 / (1.0 + dec)
        # backtrack to stay strictly feasible for the shifted barrier
        for _ in range(60):
            xn = x + t * step
            if np.all(P.A @ xn - P.b + shift > 0.0):
                break
            t *= 0.5
        else:
            raise CenteringError("line search failed to stay feasible")
        x = xn
    raise CenteringError(
        f"centering did not reach decrement {grad_tol:.1e} in {max_iter} iterations "
        "(polytope unbounded or empty?)")


def _phase_one(P: Polytope, tols: Tolerances):
    """Heuristic interior-point search: least-squares start, then center with
    a shrinking slack shift until all true slacks are positive."""
    x, *_ = np.linalg.lstsq(P.A, P.b + 1.0, rcond=None)
    s = P.A @ x - P.b
    if s.min() > 0.0:
        return x
    shift = -float(s.min()) + 1.0
    for _ in range(80):
        x, _ = _newton_center(P, x, shift, grad_tol=1e-2,
                              max_iter=tols.center_max_iter)
        s = P.A @ x - P.b
        if s.min() > 0.0:
            return x
        # centering in the enlarged polytope pushed slacks up; tighten
        shift = min(0.5 * shift, -float(s.min()) * 1.5 + 1e-3)
    raise CenteringError("phase one found no interior point (empty interior?)")


def analytic_center(P: Polytope, x0=None, tols: Tolerances | None = None) -> ManifoldPoint:
    """Minimize the log barrier by damped Newton; returns the centered point.

    Starts from x0 when given, otherwise from the phase-one heuristic.
    Divergence (unbounded or empty polytope) surfaces as CenteringError.
    """
    tols = tols or P.tols
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        if not P.contains(x0):
            raise InteriorError("supplied analytic_center start is not interior")
        x = x0
    else:
        x = _phase_one(P, tols)
    x, _ = _newton_center(P, x, 0.0, tols.center_grad_tol, tols.center_max_iter)
    return make_point(P, x)

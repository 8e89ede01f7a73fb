"""Verification oracles and statistical diagnostics.

Three families live here:

* the 1-D warm-up closed forms on an interval (alpha, beta): barrier second
  derivative p(x) = (x-alpha)^-2 + (beta-x)^-2, the isometry
  f(x) = int sqrt(p), the exact geodesic exp_x(v) = f^{-1}(f(x) + sqrt(p(x)) v)
  and the exact one-step transition density;
* brute-force geometry oracles (dense projection, index-sum Christoffel /
  Riemann / Ricci, finite-difference drift) used to cross-check the fast
  closed forms on small random instances;
* sample-quality reports: moments, Kolmogorov-Smirnov against a
  rejection-sampling reference, autocorrelation-based effective sample size,
  and the geodesic-vs-Dikin comparison table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, stats

from .polytope import ManifoldPoint, Polytope, PolytopeError, make_point
from .walk import WalkConfig, run_chain, run_dikin_chain


class GeodesicRangeError(ValueError):
    """The 1-D geodesic target lies outside the numerically invertible range."""


class OneDimBarrier:
    """Log-barrier geometry of the interval (alpha, beta).

    f is tabulated by adaptive quadrature from the midpoint (the constant
    offset cancels everywhere f is used) and inverted by bisection.
    """

    def __init__(self, alpha: float, beta: float):
        if not beta > alpha:
            raise ValueError("need beta > alpha")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.mid = 0.5 * (alpha + beta)
        # below ~1e-12 of the width, (boundary - t) loses enough digits that
        # the integrand turns to noise; treat that as the invertible range
        self._pad = 1e-12 * (beta - alpha)
        self._bracket = None

    def p(self, x):
        return (x - self.alpha) ** -2.0 + (self.beta - x) ** -2.0

    def dp(self, x):
        return -2.0 * (x - self.alpha) ** -3.0 + 2.0 * (self.beta - x) ** -3.0

    def f(self, x: float) -> float:
        # piecewise quad, halving the distance to the near boundary per piece:
        # the integrand grows like 1/dist there and a single adaptive pass
        # struggles when x is very close
        if x == self.mid:
            return 0.0
        bdry = self.beta if x > self.mid else self.alpha
        side = 1.0 if x > self.mid else -1.0
        dist_x = abs(bdry - x)
        pieces = [self.mid]
        d = abs(bdry - self.mid) / 2.0
        while d > 1.5 * dist_x and len(pieces) < 60:
            pieces.append(bdry - side * d)
            d /= 2.0
        pieces.append(x)
        total = 0.0
        for a, b in zip(pieces[:-1], pieces[1:]):
            val, _ = integrate.quad(lambda t: math.sqrt(self.p(t)), a, b,
                                    limit=100)
            total += val
        return total

    def f_inv(self, target: float) -> float:
        lo = self.alpha + self._pad
        hi = self.beta - self._pad
        if self._bracket is None:
            self._bracket = (self.f(lo), self.f(hi))
        if target <= self._bracket[0] or target >= self._bracket[1]:
            raise GeodesicRangeError("target outside the invertible range of f")
        return float(optimize.brentq(lambda x: self.f(x) - target, lo, hi,
                                     xtol=1e-14, rtol=1e-14))

    def drift(self, x: float) -> float:
        """mu(x) = -p'(x) / (2 p(x)^2)."""
        return -self.dp(x) / (2.0 * self.p(x) ** 2)


def oned_geodesic(bar: OneDimBarrier, x: float, v: float, t: float = 1.0) -> float:
    """exp_x(t v) = f^{-1}(f(x) + sqrt(p(x)) t v)."""
    if not bar.alpha < x < bar.beta:
        raise ValueError("x not interior")
    if v == 0.0 or t == 0.0:
        return float(x)
    return bar.f_inv(bar.f(x) + math.sqrt(bar.p(x)) * t * v)


def oned_transition_log_density(bar: OneDimBarrier, x: float, y: float,
                                h: float) -> float:
    """Closed form log p(x->y) = log sqrt(p(y)/(2 pi h)) - (1/2h)(f(x) - h p'(x)/(4 p^{3/2}(x)) - f(y))^2."""
    px = bar.p(x)
    shift = h * bar.dp(x) / (4.0 * px ** 1.5)
    d = bar.f(x) - shift - bar.f(y)
    return 0.5 * math.log(bar.p(y) / (2.0 * math.pi * h)) - d * d / (2.0 * h)


def oned_transition_density(bar: OneDimBarrier, x: float, y: float, h: float) -> float:
    return math.exp(oned_transition_log_density(bar, x, y, h))


# ---------------------------------------------------------------------------
# brute-force geometry oracles (small instances only)

def dense_projection(P: Polytope, x) -> np.ndarray:
    """The m x m projection P_x = A_x (A_x^T A_x)^{-1} A_x^T, built densely."""
    s = P.A @ x - P.b
    A_x = P.A / s[:, None]
    return A_x @ np.linalg.solve(A_x.T @ A_x, A_x.T)


def third_derivative_tensor(P: Polytope, x) -> np.ndarray:
    """phi_ijk = -2 sum_z (A_x)_{zi} (A_x)_{zj} (A_x)_{zk}."""
    s = P.A @ x - P.b
    A_x = P.A / s[:, None]
    return -2.0 * np.einsum("zi,zj,zk->ijk", A_x, A_x, A_x)


def christoffel_index_sum(P: Polytope, x, u, v) -> np.ndarray:
    """Gamma(u, v) from Gamma^k_ij = (1/2) sum_l g^{kl} phi_ijl."""
    s = P.A @ x - P.b
    A_x = P.A / s[:, None]
    g = A_x.T @ A_x
    phi3 = third_derivative_tensor(P, x)
    c = np.einsum("ijl,i,j->l", phi3, u, v)
    return 0.5 * np.linalg.solve(g, c)


def riemann_index_sum(P: Polytope, x, u, v, w, z) -> float:
    """<R(u,v)w, z> from R_klij = (1/4) sum_pq g^{pq} (phi_jkp phi_ilq - phi_ikp phi_jlq)."""
    s = P.A @ x - P.b
    A_x = P.A / s[:, None]
    g_inv = np.linalg.inv(A_x.T @ A_x)
    phi3 = third_derivative_tensor(P, x)
    R = 0.25 * (np.einsum("jkp,pq,ilq->klij", phi3, g_inv, phi3)
                - np.einsum("ikp,pq,jlq->klij", phi3, g_inv, phi3))
    return float(np.einsum("klij,i,j,l,k->", R, u, v, w, z))


def ricci_basis_sum(p: ManifoldPoint, u) -> float:
    """Ric(u) = sum_i <R(u, e_i) e_i, u> over a g-orthonormal basis."""
    from .geometry import orthonormal_frame, riemann_inner

    E = orthonormal_frame(p)
    return sum(riemann_inner(p, u, E[:, i], E[:, i], u) for i in range(p.n))


def finite_difference_drift(P: Polytope, x, step: float = 1e-6) -> np.ndarray:
    """-g^{-1} grad psi with psi = (1/2) log det g, gradient by central differences."""
    x = np.asarray(x, dtype=float)
    n = x.size

    def psi(y):
        s = P.A @ y - P.b
        A_y = P.A / s[:, None]
        sign, logdet = np.linalg.slogdet(A_y.T @ A_y)
        return 0.5 * logdet

    grad = np.empty(n)
    for i in range(n):
        delta = step * (1.0 + abs(x[i]))
        e = np.zeros(n)
        e[i] = delta
        grad[i] = (psi(x + e) - psi(x - e)) / (2.0 * delta)
    s = P.A @ x - P.b
    A_x = P.A / s[:, None]
    return -np.linalg.solve(A_x.T @ A_x, grad)


def hilbert_distance_bisection(P: Polytope, x, y, tol: float = 1e-12) -> float:
    """Hilbert distance with chord-boundary points found by bisection (oracle)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = y - x
    if np.linalg.norm(u) == 0.0:
        return 0.0

    def interior(t):
        return bool(np.all(P.A @ (x + t * u) - P.b > 0.0))

    def boundary_param(direction):
        lo, hi = 0.0, direction
        for _ in range(200):
            if not interior(hi):
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise PolytopeError("chord appears unbounded")
        while abs(hi - lo) > tol * max(1.0, abs(hi)):
            mid = 0.5 * (lo + hi)
            if interior(mid):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    t_max = boundary_param(1.0)
    t_min = boundary_param(-1.0)
    ratio = (t_max - t_min) / ((-t_min) * (t_max - 1.0))
    return float(np.log1p(ratio))


# ---------------------------------------------------------------------------
# sample-quality reports

def bounding_box(P: Polytope):
    """Per-axis (lo, hi) bounds via linear programming; errors when unbounded."""
    from scipy.optimize import linprog

    lo = np.empty(P.n)
    hi = np.empty(P.n)
    for i in range(P.n):
        for sign, dest in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(P.n)
            c[i] = sign
            res = linprog(c, A_ub=-P.A, b_ub=-P.b, bounds=(None, None),
                          method="highs")
            if res.status != 0:
                raise PolytopeError(f"bounding box LP failed (axis {i}): {res.message}")
            dest[i] = sign * res.fun
    return lo, hi


def rejection_sample(P: Polytope, k: int, rng, max_tries: int = 10_000_000):
    """Exact uniform draws from the polytope by bounding-box rejection."""
    lo, hi = bounding_box(P)
    out = np.empty((k, P.n))
    got = 0
    tries = 0
    while got < k:
        batch = max(256, k - got)
        pts = rng.uniform(lo, hi, size=(batch, P.n))
        keep = np.all(pts @ P.A.T - P.b > 0.0, axis=1)
        take = pts[keep][: k - got]
        out[got: got + take.shape[0]] = take
        got += take.shape[0]
        tries += batch
        if tries > max_tries:
            raise RuntimeError("rejection sampling acceptance too low")
    return out


def integrated_autocorrelation(series) -> float:
    """IACT 1 + 2 sum rho_k, truncated at the first nonpositive autocorrelation."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    if len(x) < 3 or np.allclose(x, 0.0):
        return float("nan")
    acov = np.correlate(x, x, mode="full")[len(x) - 1:] / len(x)
    rho = acov / acov[0]
    tau = 1.0
    for k in range(1, min(len(rho), len(x) // 2)):
        if rho[k] <= 0.0:
            break
        tau += 2.0 * rho[k]
    return float(tau)


def effective_sample_size(series) -> float:
    tau = integrated_autocorrelation(series)
    return len(series) / tau if np.isfinite(tau) and tau > 0 else float("nan")


@dataclass
class UniformityReport:
    """Per-coordinate moments, projection KS tests and ESS of a sample set."""

    n: int
    num_samples: int
    coord_mean: list
    coord_var: list
    ks_stats: list
    ks_pvalues: list
    ess: list
    passed_fraction: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "num_samples": self.num_samples,
            "coord_mean": self.coord_mean,
            "coord_var": self.coord_var,
            "ks_stats": self.ks_stats,
            "ks_pvalues": self.ks_pvalues,
            "ess": self.ess,
            "passed_fraction": self.passed_fraction,
            "details": self.details,
        }


def uniformity_report(samples, P: Polytope, rng, projections: int = 8,
                      reference_size: int = 4096, p_threshold: float = 0.01,
                      min_samples: int = 1000) -> UniformityReport:
    """KS tests of random 1-D projections against a rejection-sampling reference.

    The reference is exact uniform, valid at desk scale (n <= 10 or so, where
    the bounding-box acceptance rate stays workable).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} samples")
    ref = rejection_sample(P, reference_size, rng)
    ks_stats, ks_pvalues, ess = [], [], []
    for _ in range(projections):
        u = rng.standard_normal(P.n)
        u /= np.linalg.norm(u)
        proj = samples @ u
        stat = stats.ks_2samp(proj, ref @ u)
        ks_stats.append(float(stat.statistic))
        ks_pvalues.append(float(stat.pvalue))
        ess.append(effective_sample_size(proj))
    passed = sum(pv > p_threshold for pv in ks_pvalues) / projections
    return UniformityReport(
        n=P.n, num_samples=samples.shape[0],
        coord_mean=[float(v) for v in samples.mean(axis=0)],
        coord_var=[float(v) for v in samples.var(axis=0)],
        ks_stats=ks_stats, ks_pvalues=ks_pvalues, ess=ess,
        passed_fraction=passed,
        details={"p_threshold": p_threshold, "reference_size": reference_size})


@dataclass
class CompareRow:
    h: float
    dikin_radius: float
    geo_accept: float
    geo_iact: float
    dikin_accept: float
    dikin_iact: float

    def to_dict(self) -> dict:
        return {"h": self.h, "dikin_radius": self.dikin_radius,
                "geo_accept": self.geo_accept, "geo_iact": self.geo_iact,
                "dikin_accept": self.dikin_accept, "dikin_iact": self.dikin_iact}


def compare_walks(P: Polytope, h_grid, steps: int, rng, walk_cfg: WalkConfig | None = None,
                  start=None, burnin: int = 200):
    """Geodesic vs Dikin acceptance and autocorrelation over a step-size grid.

    The Dikin radius is matched to the geodesic Gaussian scale through
    r = sqrt(n h), which equates the proposal covariances on a flat patch.
    Autocorrelation is measured on the projection onto one fixed random
    direction.
    """
    from .polytope import analytic_center

    if steps <= 0:
        return []
    base = walk_cfg or WalkConfig()
    p0 = analytic_center(P) if start is None else make_point(P, np.asarray(start))
    direction = rng.standard_normal(P.n)
    direction /= np.linalg.norm(direction)
    rows = []
    for h in h_grid:
        cfg = WalkConfig(h=float(h), collocation=base.collocation,
                         burnin=burnin, thin=1, max_halvings=base.max_halvings)
        seed_g = int(rng.integers(2 ** 62))
        seed_d = int(rng.integers(2 ** 62))
        geo_samples, geo_stats, _ = run_chain(
            P, p0, steps, cfg, np.random.default_rng(seed_g))
        r = math.sqrt(P.n * float(h))
        dikin_samples, dikin_accept = run_dikin_chain(
            P, p0, steps, r, np.random.default_rng(seed_d), burnin=burnin)
        rows.append(CompareRow(
            h=float(h), dikin_radius=r,
            geo_accept=geo_stats.accept_rate,
            geo_iact=integrated_autocorrelation(geo_samples @ direction),
            dikin_accept=dikin_accept,
            dikin_iact=integrated_autocorrelation(dikin_samples @ direction)))
    return rows

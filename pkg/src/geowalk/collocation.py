"""Chebyshev-node collocation solver for first- and second-order vector ODEs.

A degree-d polynomial is required to satisfy du/dt = F(u, t) exactly at the
Chebyshev nodes c_i = l/2 + (l/2) cos((2i-1)pi/(2d)) of [0, l].  Writing the
derivative in the Lagrange basis turns the problem into the fixed point

    zeta_i = v + sum_j F(zeta_j, c_j) * integral_0^{c_i} phi_j(s) ds,

which is solved by Picard iteration; the map contracts once l times the
Lipschitz constant of F is small enough, and the caller (or the multistep
driver) halves l when it is not.  Second-order equations
u'' = F(u', u, t) iterate on node accelerations through the once- and
twice-integrated basis, which keeps the returned position and velocity
polynomials consistent by construction.

The basis integrals are exact: each Lagrange polynomial is expanded in
monomials on [-1, 1] (a Vandermonde solve, stable for d <= 32) and
integrated termwise; larger degrees fall back to adaptive quadrature.
Matrices are cached per degree on the unit interval and rescaled, since
every quantity is homogeneous in l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

_VANDERMONDE_MAX_DEGREE = 32


class CollocationError(RuntimeError):
    """Solver failure: non-finite right-hand side or inconsistent inputs."""


class NonContractionError(CollocationError):
    """Picard iteration is not contracting; shrink the interval length."""


def _row_norm_max(x, p) -> float:
    """Fast path of vector_norm for a 2-D float array."""
    if p == 2:
        return float(np.sqrt((x * x).sum(axis=1).max()))
    if p == 4:
        x2 = x * x
        return float((x2 * x2).sum(axis=1).max() ** 0.25)
    return float(np.abs(x).max())


def vector_norm(x, p) -> float:
    """l_p norm of each row's coordinates, p in {2, 4, inf}; max over rows."""
    if p not in (2, 4, np.inf, "inf"):
        raise ValueError(f"unsupported norm selector {p!r}")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return _row_norm_max(x, p)


def chebyshev_nodes(d: int, ell: float):
    """The d Chebyshev collocation nodes of [0, ell], sorted ascending.

    The generating formula ell/2 + (ell/2) cos((2i-1)pi/(2d)) is decreasing
    in i; the returned array is its reversal.
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    if not ell > 0.0:
        raise ValueError("interval length must be positive")
    i = np.arange(1, d + 1)
    nodes = ell / 2.0 + (ell / 2.0) * np.cos((2 * i - 1) * np.pi / (2 * d))
    return nodes[::-1].copy()


def _barycentric_weights(nodes):
    d = len(nodes)
    w = np.ones(d)
    for i in range(d):
        w[i] = 1.0 / np.prod(nodes[i] - np.delete(nodes, i))
    return w


def _monomial_coefficients(unit_nodes):
    """Columns are monomial coefficients of the Lagrange basis on [-1, 1] nodes."""
    d = len(unit_nodes)
    V = np.vander(unit_nodes, N=d, increasing=True)
    return np.linalg.solve(V, np.eye(d))


def _lagrange_integrals_quadrature(nodes, uppers):
    """M[i, j] = integral_0^{uppers[i]} phi_j via adaptive quadrature (large d)."""
    from scipy.integrate import quad

    w = _barycentric_weights(nodes)
    d = len(nodes)

    def basis(j, t):
        diff = t - nodes
        hit = np.abs(diff) < 1e-15
        if hit.any():
            return 1.0 if hit[j] else 0.0
        q = w / diff
        return q[j] / q.sum()

    M = np.empty((len(uppers), d))
    for j in range(d):
        for i, up in enumerate(uppers):
            M[i, j], _ = quad(lambda t: basis(j, t), 0.0, up, limit=200,
                              points=list(nodes[nodes < up]))
    return M


@lru_cache(maxsize=64)
def _unit_basis(d: int):
    """Cached node/basis data on the unit interval [0, 1].

    Returns (nodes, bary_weights, coeffs, M1, M2) where coeffs are monomial
    coefficients on the [-1, 1] rescaling (None beyond the Vandermonde range),
    M1[i, j] = int_0^{c_i} phi_j and M2[i, j] = int_0^{c_i} (c_i - s) phi_j(s) ds.
    """
    nodes = chebyshev_nodes(d, 1.0)
    bw = _barycentric_weights(nodes)
    if d <= _VANDERMONDE_MAX_DEGREE:
        u = 2.0 * nodes - 1.0
        C = _monomial_coefficients(u)
        p = np.arange(d)
        # antiderivatives of u^p from -1 to u_i, and of the s-weighted basis
        U1 = (u[:, None] ** (p + 1) - (-1.0) ** (p + 1)) / (p + 1)
        U2 = (u[:, None] ** (p + 2) - (-1.0) ** (p + 2)) / (p + 2)
        M1 = 0.5 * (U1 @ C)
        # int_0^{c_i} s phi_j ds = (1/4)(int (1+u) psi_j) on the unit interval
        S1 = 0.25 * ((U1 + U2) @ C)
        M2 = nodes[:, None] * M1 - S1
    else:
        C = None
        M1 = _lagrange_integrals_quadrature(nodes, nodes)
        from scipy.integrate import quad

        w = bw
        def basis(j, t):
            diff = t - nodes
            hit = np.abs(diff) < 1e-15
            if hit.any():
                return 1.0 if hit[j] else 0.0
            q = w / diff
            return q[j] / q.sum()

        M2 = np.empty((d, d))
        for j in range(d):
            for i, up in enumerate(nodes):
                M2[i, j], _ = quad(lambda t: (up - t) * basis(j, t), 0.0, up,
                                   limit=200, points=list(nodes[nodes < up]))
    return nodes, bw, C, M1, M2


def lagrange_integral_matrix(nodes, ell: float):
    """M[i, j] = integral_0^{nodes[i]} phi_j(s) ds for the Lagrange basis on `nodes`.

    Works for any distinct nodes in [0, ell]; the Chebyshev case used by the
    solvers is served from the per-degree cache.
    """
    nodes = np.asarray(nodes, dtype=float)
    d = len(nodes)
    if len(np.unique(nodes)) != d:
        raise ValueError("collocation nodes must be distinct")
    cheb = chebyshev_nodes(d, ell)
    if nodes.shape == cheb.shape and np.allclose(nodes, cheb, rtol=0, atol=1e-12 * max(ell, 1.0)):
        return ell * _unit_basis(d)[3]
    if d <= _VANDERMONDE_MAX_DEGREE:
        u = 2.0 * nodes / ell - 1.0
        C = _monomial_coefficients(u)
        p = np.arange(d)
        U1 = (u[:, None] ** (p + 1) - (-1.0) ** (p + 1)) / (p + 1)
        return (ell / 2.0) * (U1 @ C)
    return _lagrange_integrals_quadrature(nodes, nodes)


def _integral_weights(d: int, ell: float, t):
    """w_j(t) = integral_0^t phi_j(s) ds on the degree-d Chebyshev basis of [0, ell]."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    nodes, _, C, _, _ = _unit_basis(d)
    if C is not None:
        u = 2.0 * (t / ell) - 1.0
        p = np.arange(d)
        U1 = (u[:, None] ** (p + 1) - (-1.0) ** (p + 1)) / (p + 1)
        return (ell / 2.0) * (U1 @ C)
    # large-degree fallback: integrate a Chebyshev-series representation
    from numpy.polynomial import chebyshev as nc

    u_nodes = 2.0 * nodes - 1.0
    coef = nc.chebfit(u_nodes, np.eye(d), d - 1)
    integ = nc.chebint(coef, lbnd=-1.0)
    u = 2.0 * (t / ell) - 1.0
    return (ell / 2.0) * nc.chebval(u, integ).T


@lru_cache(maxsize=64)
def _endpoint_weights(d: int):
    """integral_0^1 phi_j on the unit interval (row vector)."""
    return _integral_weights(d, 1.0, np.array([1.0]))[0]


@lru_cache(maxsize=256)
def _scaled_mats(d: int, ell: float):
    """(nodes, M, N) of the degree-d basis rescaled to [0, ell]."""
    unit_nodes, _, _, M1u, M2u = _unit_basis(d)
    return ell * unit_nodes, ell * M1u, ell * ell * M2u


@lru_cache(maxsize=256)
def _grid_weights(d: int, ell: float, k: int):
    """Basis integrals up to a uniform k-point grid of [0, ell]."""
    return _integral_weights(d, ell, np.linspace(0.0, ell, k))


@lru_cache(maxsize=64)
def _position_grid_weights(d: int):
    """Unit-interval integrals of the degree-d basis up to the (d+1)-grid nodes."""
    return _integral_weights(d, 1.0, _unit_basis(d + 1)[0])


@dataclass
class SolveInfo:
    """Iteration record of one collocation solve."""

    iterations: int
    node_changes: list
    residual: float
    K: float
    Z: int
    converged: bool
    halvings: int = 0


@dataclass
class PolyCurve:
    """Polynomial curve p(t) = v + integral_0^t sum_j D_j phi_j(s) ds on [0, ell].

    v is the initial value and D the derivative values at the Chebyshev
    nodes, so p(0) = v exactly and p'(c_i) = D_i by the interpolation
    property.  value/derivative accept a scalar t or an array of times.
    """

    v: np.ndarray
    deriv_nodes: np.ndarray
    nodes: np.ndarray
    ell: float
    info: SolveInfo | None = field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return len(self.nodes)

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        slop = 1e-12 * max(self.ell, 1.0)
        if np.any(t < -slop) or np.any(t > self.ell + slop):
            raise ValueError(f"t outside [0, {self.ell}]")
        return t

    def value(self, t):
        """Curve value(s) at t."""
        scalar = np.isscalar(t) or np.ndim(t) == 0
        t = self._check_t(t)
        W = _integral_weights(self.degree, self.ell, t)
        out = self.v + W @ self.deriv_nodes
        return out[0] if scalar else out

    def end_value(self):
        """Curve value at t = ell (cached endpoint weights)."""
        return self.v + self.ell * (_endpoint_weights(self.degree) @ self.deriv_nodes)

    def value_grid(self, k: int):
        """Curve values on the uniform k-point grid of [0, ell] (cached weights)."""
        return self.v + _grid_weights(self.degree, self.ell, k) @ self.deriv_nodes

    def derivative(self, t):
        """Derivative value(s) at t via barycentric interpolation of the node data."""
        scalar = np.isscalar(t) or np.ndim(t) == 0
        t = np.atleast_1d(self._check_t(t))
        bw = _unit_basis(self.degree)[1] / self.ell  # weights scale-invariant up to common factor
        out = np.empty((len(t), self.deriv_nodes.shape[1]))
        for k, tk in enumerate(t):
            diff = tk - self.nodes
            hit = np.nonzero(np.abs(diff) < 1e-14 * max(self.ell, 1.0))[0]
            if hit.size:
                out[k] = self.deriv_nodes[hit[0]]
            else:
                q = bw / diff
                out[k] = (q @ self.deriv_nodes) / q.sum()
        return out[0] if scalar else out

    def node_values(self):
        """Curve values at the collocation nodes (the fixed-point zeta)."""
        M = self.ell * _unit_basis(self.degree)[3]
        return self.v + M @ self.deriv_nodes


@dataclass(frozen=True)
class CollocationConfig:
    """Solver knobs.

    degree: polynomial degree d (None picks max(8, ceil(2 log2(1/tol)))).
    ell: interval length.
    max_iters: hard cap on Picard iterations (the schedule Z = ceil(log2(K/tol))
        is clipped to it).
    tol: residual / node-change target epsilon.
    p_norm: norm selector in {2, 4, inf} used for all contraction measurements.
    residual_samples: extra uniform sample times where the residual certificate
        is checked on top of the nodes.
    """

    degree: int | None = None
    ell: float = 1.0
    max_iters: int = 60
    tol: float = 1e-9
    p_norm: object = 2
    residual_samples: int = 0

    def __post_init__(self):
        if self.degree is not None and self.degree < 1:
            raise ValueError("degree must be >= 1")
        if not self.ell > 0.0:
            raise ValueError("ell must be positive")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.p_norm not in (2, 4, np.inf, "inf"):
            raise ValueError("p_norm must be one of {2, 4, inf}")

    def resolved_degree(self) -> int:
        if self.degree is not None:
            return self.degree
        return max(8, math.ceil(2.0 * math.log2(1.0 / self.tol)))


def _as_batched(F, batched: bool):
    """Normalize F to the batched signature F(U: (k, n), ts: (k,)) -> (k, n)."""
    if batched:
        return F
    def fb(U, ts):
        return np.stack([np.atleast_1d(np.asarray(F(U[i], ts[i]), dtype=float))
                         for i in range(len(ts))])
    return fb


def _iteration_budget(K: float, tol: float, cap: int) -> int:
    if K <= 0.0 or not np.isfinite(K):
        return min(4, cap)
    return int(min(cap, max(1, math.ceil(math.log2(max(K / tol, 2.0))))))


def _check_monotone(changes) -> bool:
    """True when the last three consecutive node-change ratios all increased."""
    if len(changes) < 4:
        return False
    tail = changes[-4:]
    return tail[1] > tail[0] and tail[2] > tail[1] and tail[3] > tail[2] \
        and tail[3] > 10.0 * min(changes)


def residual(curve: PolyCurve, F, p_norm=2, batched=False, extra_samples: int = 0) -> float:
    """Independent residual certificate max_t ||p'(t) - F(p(t), t)||_p.

    Checked at the collocation nodes, plus `extra_samples` uniform times.
    """
    fb = _as_batched(F, batched)
    ts = curve.nodes
    if extra_samples > 0:
        ts = np.sort(np.concatenate([ts, np.linspace(0.0, curve.ell, extra_samples)]))
    vals = curve.value(ts)
    ders = curve.derivative(ts)
    return vector_norm(ders - fb(vals, ts), p_norm)


def collocation_first_order(F, v, cfg: CollocationConfig, batched: bool = False) -> PolyCurve:
    """Solve du/dt = F(u, t), u(0) = v on [0, cfg.ell].

    F maps (n-vector, time) to an n-vector; pass batched=True when F accepts
    stacked rows F(U: (k, n), ts: (k,)) -> (k, n), which the walk uses to
    amortize linear algebra across nodes.  Raises NonContractionError when
    the Picard iteration diverges (the interval is too long for F's
    Lipschitz constant).
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    fb = _as_batched(F, batched)
    d = cfg.resolved_degree()
    ell = cfg.ell
    nodes, M, _ = _scaled_mats(d, ell)

    # K estimated from ||F(v, .)|| at the nodes (a dense proxy for max over [0, ell])
    f_nodes = fb(np.broadcast_to(v, (d, v.size)), nodes)
    if not np.isfinite(f_nodes).all():
        raise CollocationError("F returned non-finite values at the initial state")
    K = 4000.0 * ell * _row_norm_max(f_nodes, cfg.p_norm)
    Z = _iteration_budget(K, cfg.tol, cfg.max_iters)

    zeta = v + M @ f_nodes
    changes = []
    iters = 0
    for _ in range(Z):
        Fz = fb(zeta, nodes)
        if not np.isfinite(Fz).all():
            raise CollocationError("F returned non-finite values during iteration")
        zeta_new = v + M @ Fz
        delta = _row_norm_max(zeta_new - zeta, cfg.p_norm)
        changes.append(delta)
        zeta = zeta_new
        iters += 1
        if delta < cfg.tol / 10.0:
            break
        if _check_monotone(changes):
            raise NonContractionError(
                f"node changes grew over 3 consecutive iterations (ell={ell:.3e})")

    D = fb(zeta, nodes)
    curve = PolyCurve(v=v, deriv_nodes=D, nodes=nodes, ell=ell)
    # residual at the nodes: p'(c_i) = D_i exactly, p(c_i) = v + (M D)_i
    res = _row_norm_max(D - fb(v + M @ D, nodes), cfg.p_norm)
    if cfg.residual_samples > 0:
        res = max(res, residual(curve, fb, cfg.p_norm, batched=True,
                                extra_samples=cfg.residual_samples))
    converged = res <= 10.0 * cfg.tol
    curve.info = SolveInfo(iterations=iters, node_changes=changes, residual=res,
                           K=K, Z=Z, converged=converged)
    if not converged:
        raise NonContractionError(
            f"collocation residual {res:.3e} above 10x tolerance {cfg.tol:.1e} "
            f"(ell={ell:.3e})")
    return curve


def collocation_second_order(F, v, w, cfg: CollocationConfig, batched: bool = False):
    """Solve u'' = F(u', u, t), u(0) = v, u'(0) = w on [0, cfg.ell].

    Iterates on the node accelerations a_i = F(u'(c_i), u(c_i), c_i) through
    the once- and twice-integrated Lagrange basis, so the returned
    (position, velocity) PolyCurve pair is consistent by construction:
    the position curve is the exact integral of the velocity curve.

    F maps (velocity, position, time) to acceleration; batched=True expects
    F(dU: (k, n), U: (k, n), ts: (k,)) -> (k, n).
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if batched:
        fb = F
    else:
        def fb(dU, U, ts):
            return np.stack([np.atleast_1d(np.asarray(F(dU[i], U[i], ts[i]),
                                                      dtype=float))
                             for i in range(len(ts))])
    d = cfg.resolved_degree()
    ell = cfg.ell
    nodes, M, N = _scaled_mats(d, ell)

    line = v + nodes[:, None] * w
    acc = fb(np.broadcast_to(w, (d, w.size)), line, nodes)
    if not np.isfinite(acc).all():
        raise CollocationError("F returned non-finite values at the initial state")
    alpha = 4000.0 * ell
    K = alpha * _row_norm_max(acc, cfg.p_norm) + _row_norm_max(w[None, :], cfg.p_norm)
    Z = _iteration_budget(K, cfg.tol, cfg.max_iters)

    changes = []
    iters = 0
    for _ in range(Z):
        vel = w + M @ acc
        pos = line + N @ acc
        acc_new = fb(vel, pos, nodes)
        if not np.isfinite(acc_new).all():
            raise CollocationError("F returned non-finite values during iteration")
        delta = _row_norm_max(acc_new - acc, cfg.p_norm) * ell  # velocity-scale change
        changes.append(delta)
        acc = acc_new
        iters += 1
        if delta < cfg.tol / 10.0:
            break
        if _check_monotone(changes):
            raise NonContractionError(
                f"acceleration changes grew over 3 consecutive iterations (ell={ell:.3e})")

    vel_curve = PolyCurve(v=w, deriv_nodes=acc, nodes=nodes, ell=ell)
    # the velocity polynomial has degree d; sampling it on the (d+1)-node grid
    # makes the position curve its exact integral
    pos_curve = PolyCurve(v=v, deriv_nodes=w + ell * (_position_grid_weights(d) @ acc),
                          nodes=ell * _unit_basis(d + 1)[0], ell=ell)

    # acceleration residual at the nodes: vel'(c_i) = acc_i exactly
    vel_res = _row_norm_max(acc - fb(w + M @ acc, line + N @ acc, nodes), cfg.p_norm)
    if cfg.residual_samples > 0:
        vel_res = max(vel_res, residual(
            vel_curve, lambda dU, ts: fb(dU, pos_curve.value(ts), ts),
            cfg.p_norm, batched=True, extra_samples=cfg.residual_samples))
    converged = vel_res <= 10.0 * cfg.tol / max(ell, 1e-12)
    info = SolveInfo(iterations=iters, node_changes=changes, residual=vel_res,
                     K=K, Z=Z, converged=converged)
    vel_curve.info = info
    pos_curve.info = info
    if not converged:
        raise NonContractionError(
            f"second-order residual {vel_res:.3e} too large (ell={ell:.3e})")
    return pos_curve, vel_curve


@dataclass
class PiecewiseCurve:
    """Stitched solution of a multistep solve: segments of PolyCurve with offsets."""

    starts: list
    curves: list

    @property
    def total_length(self) -> float:
        return self.starts[-1] + self.curves[-1].ell

    def _locate(self, t: float):
        for t0, c in zip(reversed(self.starts), reversed(self.curves)):
            if t >= t0 - 1e-12:
                return t0, c
        return self.starts[0], self.curves[0]

    def value(self, t: float):
        t0, c = self._locate(float(t))
        return c.value(min(max(t - t0, 0.0), c.ell))

    def derivative(self, t: float):
        t0, c = self._locate(float(t))
        return c.derivative(min(max(t - t0, 0.0), c.ell))


def collocation_multistep(F, v, total_length: float, cfg: CollocationConfig,
                          lipschitz: float | None = None, batched: bool = False,
                          max_halvings: int = 20):
    """March du/dt = F(u, t) over [0, total_length] in collocation steps.

    Step length is 1/(2000 * lipschitz) when a Lipschitz estimate is given,
    otherwise cfg.ell; any step whose Picard iteration fails to contract is
    halved recursively (up to max_halvings).  Step tolerances are tightened
    geometrically toward the start (factor 1/2 per remaining step) so the
    stitched endpoint meets cfg.tol.  Returns (endpoint, PiecewiseCurve).
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    fb = _as_batched(F, batched)
    ell = cfg.ell if lipschitz is None else 1.0 / (2000.0 * max(lipschitz, 1e-12))
    ell = min(ell, total_length) if total_length > 0 else ell
    if total_length <= 0.0:
        return v.copy(), PiecewiseCurve(starts=[0.0], curves=[
            PolyCurve(v=v, deriv_nodes=np.zeros((1, v.size)),
                      nodes=chebyshev_nodes(1, 1.0), ell=1.0)])
    n_steps = int(math.ceil(total_length / ell - 1e-12))
    ell = total_length / n_steps

    starts, curves = [], []
    u = v.copy()
    t0 = 0.0
    for k in range(n_steps):
        eps_k = max(cfg.tol * 0.5 ** (n_steps - 1 - k), 1e-15)
        seg = _solve_segment(fb, u, t0, ell, replace(cfg, tol=eps_k), max_halvings)
        for s0, c in seg:
            starts.append(s0)
            curves.append(c)
        u = curves[-1].end_value()
        t0 += ell
    return u, PiecewiseCurve(starts=starts, curves=curves)


def _solve_segment(fb, u0, t0: float, ell: float, cfg: CollocationConfig,
                   halvings_left: int):
    """One multistep segment with recursive halving on non-contraction."""
    def shifted(U, ts):
        return fb(U, ts + t0)

    try:
        curve = collocation_first_order(shifted, u0, replace(cfg, ell=ell), batched=True)
        return [(t0, curve)]
    except NonContractionError:
        if halvings_left <= 0:
            raise
    half = ell / 2.0
    left = _solve_segment(fb, u0, t0, half, cfg, halvings_left - 1)
    u_mid = left[-1][1].end_value()
    right = _solve_segment(fb, u_mid, t0 + half, half, cfg, halvings_left - 1)
    return left + right


def second_order_multistep(F, v, w, total_length: float, cfg: CollocationConfig,
                           batched: bool = False, max_halvings: int = 6):
    """Solve u'' = F(u', u, t) over [0, total_length], halving on non-contraction.

    Returns a list of (t0, position_curve, velocity_curve) segments chained
    through matching (value, derivative) at the joints.  Exceptions other
    than NonContractionError raised by F propagate unchanged.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if batched:
        fb = F
    else:
        def fb(dU, U, ts):
            return np.stack([np.atleast_1d(np.asarray(F(dU[i], U[i], ts[i]),
                                                      dtype=float))
                             for i in range(len(ts))])
    return _solve_segment_2nd(fb, v, w, 0.0, total_length, cfg, max_halvings)


def _solve_segment_2nd(fb, v, w, t0: float, ell: float, cfg: CollocationConfig,
                       halvings_left: int):
    def shifted(dU, U, ts):
        return fb(dU, U, ts + t0)

    try:
        pos, vel = collocation_second_order(shifted, v, w, replace(cfg, ell=ell),
                                            batched=True)
        return [(t0, pos, vel)]
    except NonContractionError:
        if halvings_left <= 0:
            raise
    half = ell / 2.0
    left = _solve_segment_2nd(fb, v, w, t0, half, cfg, halvings_left - 1)
    _, lpos, lvel = left[-1]
    v_mid = lpos.end_value()
    w_mid = lvel.end_value()
    right = _solve_segment_2nd(fb, v_mid, w_mid, t0 + half, half, cfg,
                               halvings_left - 1)
    return left + right

"""Metropolis-filtered geodesic walk and the Dikin-walk baseline.

One step from x: draw w ~ N_x(0, I), solve the geodesic with
gamma'(0) = w/sqrt(n) + (1/2) sqrt(h/n) mu(x) over [0, ell = sqrt(nh)],
land at y = gamma(ell), then filter with

    min(1, p(y -> x) / p(x -> y)),

where the one-step density is

    log p(x->y) = -log det Psi(ell) + (1/2) log det g(y)
                  - (n/2) log(2 pi h) - (1/(2h)) ||v_x - (h/2) mu(x)||_x^2

and Psi solves the Jacobi matrix equation Psi'' + R(t) Psi = 0, Psi(0) = 0,
Psi'(0) = I/ell in a parallel-transported g-orthonormal frame.  The unscaled
tangent v_x = ell * gamma'(0) = sqrt(h) w + (h/2) mu(x); the reverse tangent
is v_y = -ell * gamma'(ell).

Numerical failures (geodesic leaves the polytope, non-contracting
collocation after the halving cap, singular Psi) count as rejections with a
reason code, which keeps the Markov kernel well defined.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .collocation import (CollocationConfig, NonContractionError,
                          collocation_first_order, second_order_multistep)
from .geometry import auxiliary_V
from .polytope import (FactorizationError, InteriorError, ManifoldPoint,
                       Polytope, make_point)


class GeodesicExitError(RuntimeError):
    """The geodesic (or an iterate of its solver) left the polytope."""


class SingularJacobiError(RuntimeError):
    """Psi(ell) is numerically singular; the proposal cannot be weighted."""


@dataclass(frozen=True)
class WalkConfig:
    """Step-size and solver configuration of the geodesic walk.

    h: step size; None picks step_constant / n^(3/4).
    collocation: per-step ODE solver settings (interval length is overridden
        with ell = sqrt(nh) internally).
    burnin: steps discarded before recording; None picks 10 * ceil(1/h).
    thin: record every thin-th post-burn-in state.
    max_halvings: geodesic-solve interval halvings before a proposal is
        declared non-contracting.
    record_diagnostics: keep full WalkStep records during run_chain.
    """

    h: float | None = None
    step_constant: float = 0.1
    collocation: CollocationConfig = field(
        default_factory=lambda: CollocationConfig(degree=8, tol=1e-8, p_norm=4))
    burnin: int | None = None
    thin: int = 1
    max_halvings: int = 6
    record_diagnostics: bool = False
    exit_samples: int = 32

    def resolve_h(self, n: int) -> float:
        h = self.h if self.h is not None else self.step_constant / n ** 0.75
        if not h > 0.0:
            raise ValueError("step size must be positive")
        return h


@dataclass
class WalkStep:
    """Full record of one proposal."""

    start: ManifoldPoint
    h: float
    ell: float
    w: np.ndarray | None = None
    v_x: np.ndarray | None = None
    end: ManifoldPoint | None = None
    v_y: np.ndarray | None = None
    path: "GeodesicPath | None" = None
    logdet_fwd: float = np.nan
    logdet_rev: float = np.nan
    log_fwd: float = np.nan
    log_rev: float = np.nan
    v_gamma: float = np.nan
    speed_drift: float = np.nan
    accepted: bool = False
    fail_reason: str | None = None
    _R_cache: list | None = field(default=None, repr=False)

    @property
    def log_ratio(self) -> float:
        return self.log_rev - self.log_fwd


def sample_gaussian_direction(p: ManifoldPoint, rng) -> np.ndarray:
    """Draw w with covariance g(x)^{-1} (so E <w, u>_x^2 = ||u||_x^2)."""
    z = rng.standard_normal(p.n)
    return p.chol_inv.T @ z


class _NodeGeometry:
    """Batched log-barrier geometry at k points along a curve.

    Stores slacks, rescaled constraints, metrics and slack velocities for a
    stack of positions/velocities, with everything validated strictly
    interior.  This is what makes the per-step ODE right-hand sides one
    einsum chain instead of k separate factorizations.
    """

    __slots__ = ("S", "AX", "G", "svel", "_Ginv")

    def __init__(self, P: Polytope, U, V=None):
        S = U @ P.A.T - P.b
        if S.min() <= P._slack_floor:
            raise GeodesicExitError(f"curve point slack {S.min():.3e} at/below guard")
        self.S = S
        self.AX = P.A[None, :, :] / S[:, :, None]
        self.G = np.einsum("kmi,kmj->kij", self.AX, self.AX)
        self.svel = None if V is None else np.einsum("kmi,ki->km", self.AX, V)
        self._Ginv = None

    @property
    def Ginv(self):
        """Batched metric inverses, cached for the repeated transport/Jacobi solves."""
        if self._Ginv is None:
            try:
                self._Ginv = np.linalg.inv(self.G)
            except np.linalg.LinAlgError as exc:
                raise GeodesicExitError("metric inversion failed along the curve") from exc
        return self._Ginv

    def solve(self, rhs):
        """g^{-1} rhs per point; rhs shape (k, n) or (k, n, j)."""
        try:
            if rhs.ndim == 2:
                return np.linalg.solve(self.G, rhs[..., None])[..., 0]
            return np.linalg.solve(self.G, rhs)
        except np.linalg.LinAlgError as exc:
            raise GeodesicExitError("metric solve failed along the curve") from exc


def _geodesic_rhs_batched(P: Polytope):
    """Batched acceleration F(dU, U, ts) = g^{-1} A_x^T s_{dU}^2 rows."""

    def F(dU, U, ts):
        geo = _NodeGeometry(P, U, dU)
        sv2 = geo.svel * geo.svel
        rhs = np.einsum("kmi,km->ki", geo.AX, sv2)
        return geo.solve(rhs)

    return F


@dataclass
class GeodesicSegment:
    t0: float
    ell: float
    pos: object
    vel: object
    geometry: _NodeGeometry | None = None

    def node_states(self):
        """Positions and velocities at this segment's collocation nodes."""
        ts = self.vel.nodes
        return self.pos.value(ts), self.vel.value(ts)


class GeodesicPath:
    """Piecewise-polynomial geodesic gamma on [0, ell_total]."""

    def __init__(self, P: Polytope, segments):
        self.polytope = P
        self.segments = [GeodesicSegment(t0=t0, ell=pos.ell, pos=pos, vel=vel)
                         for (t0, pos, vel) in segments]
        self.ell = self.segments[-1].t0 + self.segments[-1].ell

    def _segment_at(self, t: float) -> GeodesicSegment:
        for seg in reversed(self.segments):
            if t >= seg.t0 - 1e-12:
                return seg
        return self.segments[0]

    def position(self, t: float):
        seg = self._segment_at(float(t))
        return seg.pos.value(min(max(t - seg.t0, 0.0), seg.ell))

    def velocity(self, t: float):
        seg = self._segment_at(float(t))
        return seg.vel.value(min(max(t - seg.t0, 0.0), seg.ell))

    def end_position(self):
        return self.segments[-1].pos.end_value()

    def end_velocity(self):
        return self.segments[-1].vel.end_value()

    def sample(self, ts):
        """Positions and velocities at global times (k,) -> ((k, n), (k, n))."""
        ts = np.asarray(ts, dtype=float)
        pos = np.empty((len(ts), self.polytope.n))
        vel = np.empty_like(pos)
        for seg in self.segments:
            mask = (ts >= seg.t0 - 1e-12) & (ts <= seg.t0 + seg.ell + 1e-12)
            if mask.any():
                local = np.clip(ts[mask] - seg.t0, 0.0, seg.ell)
                pos[mask] = seg.pos.value(local)
                vel[mask] = seg.vel.value(local)
        return pos, vel

    def sample_uniform(self, k: int):
        """sample() on the uniform k-grid, with cached weights when single-segment."""
        if len(self.segments) == 1:
            seg = self.segments[0]
            return seg.pos.value_grid(k), seg.vel.value_grid(k)
        return self.sample(np.linspace(0.0, self.ell, k))

    def node_geometry(self):
        """Build (lazily) the per-segment geometry caches at collocation nodes."""
        for seg in self.segments:
            if seg.geometry is None:
                U, V = seg.node_states()
                seg.geometry = _NodeGeometry(self.polytope, U, V)
        return [seg.geometry for seg in self.segments]


def _solve_geodesic(P: Polytope, x, gamma0, ell: float, ccfg: CollocationConfig,
                    max_halvings: int) -> GeodesicPath:
    F = _geodesic_rhs_batched(P)
    segs = second_order_multistep(F, x, gamma0, ell, replace(ccfg, ell=ell),
                                  batched=True, max_halvings=max_halvings)
    return GeodesicPath(P, segs)


def propose(p: ManifoldPoint, cfg: WalkConfig, rng) -> WalkStep:
    """One unfiltered proposal: draw w ~ N_x(0, I) and solve the geodesic.

    Failures are recorded in step.fail_reason ("exit" or "non_contraction")
    rather than raised, matching the fold-into-rejection kernel semantics.
    """
    w = sample_gaussian_direction(p, rng)
    h = cfg.resolve_h(p.n)
    return _propose_from_gaussian(p, cfg, h, w)


def propose_with_tangent(p: ManifoldPoint, cfg: WalkConfig, v_x) -> WalkStep:
    """Proposal from an explicit unscaled tangent v_x (exp_p(v_x) branch).

    The implied Gaussian part is w = (v_x - (h/2) mu) / sqrt(h), so the
    density bookkeeping matches the random-draw pipeline.
    """
    h = cfg.resolve_h(p.n)
    w = (np.asarray(v_x, dtype=float) - 0.5 * h * p.drift) / math.sqrt(h)
    return _propose_from_gaussian(p, cfg, h, w)


def _propose_from_gaussian(p: ManifoldPoint, cfg: WalkConfig, h: float,
                           w) -> WalkStep:
    P = p.polytope
    n = p.n
    ell = math.sqrt(n * h)
    gamma0 = w / math.sqrt(n) + 0.5 * math.sqrt(h / n) * p.drift
    step = WalkStep(start=p, h=h, ell=ell, w=w, v_x=ell * gamma0)

    try:
        path = _solve_geodesic(P, p.x, gamma0, ell, cfg.collocation, cfg.max_halvings)
    except NonContractionError:
        step.fail_reason = "non_contraction"
        return step
    except (GeodesicExitError, InteriorError, FactorizationError):
        step.fail_reason = "exit"
        return step

    pos, vel = path.sample_uniform(cfg.exit_samples)
    slack = pos @ P.A.T - P.b
    if slack.min() <= 0.0:
        step.fail_reason = "exit"
        step.path = path
        return step
    try:
        end = make_point(P, path.end_position())
        path.node_geometry()
    except (InteriorError, FactorizationError, GeodesicExitError):
        step.fail_reason = "exit"
        step.path = path
        return step

    step.path = path
    step.end = end
    step.v_y = -ell * path.end_velocity()

    svel = (vel @ P.A.T) / slack
    speeds = np.sqrt((svel * svel).sum(axis=1))
    node_svel = np.concatenate([seg.geometry.svel for seg in path.segments])
    step.v_gamma = auxiliary_V(np.vstack([svel, node_svel]), h, n)
    if speeds[0] > 0.0:
        step.speed_drift = float(np.abs(speeds - speeds[0]).max() / speeds[0])
    else:
        step.speed_drift = 0.0
    return step


def _transport_frame(path: GeodesicPath, X0):
    """Parallel-transport the frame X0 along the path.

    Returns (frames_per_segment, X_end) where each entry stacks the frame at
    that segment's collocation nodes, shape (d, n, n).
    """
    n = X0.shape[0]
    frames = []
    X = X0
    for seg in path.segments:
        geo = seg.geometry
        nodes = seg.vel.nodes

        def F(Y, ts, geo=geo, nodes=nodes):
            idx = np.searchsorted(nodes, ts - 1e-13 * max(seg.ell, 1.0))
            idx = np.clip(idx, 0, len(nodes) - 1)
            Xs = Y.reshape(-1, n, n)
            AXk = geo.AX[idx]
            sv = geo.svel[idx]
            SX = np.einsum("kmi,kin->kmn", AXk, Xs)
            rhs = np.einsum("kmi,kmn->kin", AXk, sv[:, :, None] * SX)
            out = np.einsum("kij,kjn->kin", geo.Ginv[idx], rhs)
            return out.reshape(len(ts), n * n)

        cfg = CollocationConfig(degree=len(nodes), ell=seg.ell, tol=1e-9, p_norm=2)
        curve = collocation_first_order(F, X.flatten(), cfg, batched=True)
        frames.append(curve.node_values().reshape(-1, n, n))
        X = curve.end_value().reshape(n, n)
    return frames, X


def _gram_schmidt_g(G, X):
    """Orthonormalize frame columns in the inner product u^T G v."""
    Q = X.copy()
    n = Q.shape[1]
    for i in range(n):
        for j in range(i):
            Q[:, i] -= (Q[:, j] @ G @ Q[:, i]) * Q[:, j]
        nrm = math.sqrt(Q[:, i] @ G @ Q[:, i])
        Q[:, i] /= nrm
    return Q


def _curvature_at_nodes(path: GeodesicPath, frames, ortho_tol: float = 1e-6):
    """R(t) matrices at every collocation node, per segment, in the given frames."""
    out = []
    for seg, X in zip(path.segments, frames):
        geo = seg.geometry
        O = np.einsum("kin,kij,kjl->knl", X, geo.G, X)
        err = np.abs(O - np.eye(X.shape[1])).max(axis=(1, 2))
        if (err > ortho_tol).any():
            X = X.copy()
            for k in np.nonzero(err > ortho_tol)[0]:
                X[k] = _gram_schmidt_g(geo.G[k], X[k])
        c = geo.svel
        Q = np.einsum("kmi,kin->kmn", geo.AX, X)  # s_{X_i} columns
        Zc = Q * c[:, :, None]
        W = np.einsum("kij,kjn->kin", geo.Ginv,
                      np.einsum("kmi,kmn->kin", geo.AX, Zc))
        PZc = np.einsum("kmi,kin->kmn", geo.AX, W)
        term1 = np.einsum("kmn,kml->knl", Zc, PZc)
        r = np.einsum("kmi,ki->km", geo.AX,
                      np.einsum("kij,kj->ki", geo.Ginv,
                                np.einsum("kmi,km->ki", geo.AX, c * c)))
        term2 = np.einsum("kmn,km,kml->knl", Q, r, Q)
        R = term1 - term2
        out.append(0.5 * (R + np.transpose(R, (0, 2, 1))))
    return out


def _solve_jacobi(segment_data, ell_total: float, n: int, tol: float = 1e-10):
    """Solve Psi'' + R(t) Psi = 0, Psi(0)=0, Psi'(0)=I/ell over chained segments.

    segment_data is a list of (ell_seg, nodes_local, R_stack); returns
    log det Psi(ell_total).
    """
    from .collocation import collocation_second_order

    psi = np.zeros(n * n)
    dpsi = (np.eye(n) / ell_total).flatten()
    for ell_seg, nodes, R in segment_data:
        def F(dY, Y, ts, nodes=nodes, R=R, ell_seg=ell_seg):
            idx = np.clip(np.searchsorted(nodes, ts - 1e-13 * max(ell_seg, 1.0)),
                          0, len(nodes) - 1)
            Psi = Y.reshape(-1, n, n)
            return -np.einsum("kij,kjl->kil", R[idx], Psi).reshape(
                len(ts), n * n)

        cfg = CollocationConfig(degree=len(nodes), ell=ell_seg, tol=tol, p_norm=2)
        pos, vel = collocation_second_order(F, psi, dpsi, cfg, batched=True)
        psi = pos.end_value()
        dpsi = vel.end_value()
    sign, logdet = np.linalg.slogdet(psi.reshape(n, n))
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularJacobiError("Psi(ell) numerically singular")
    return float(logdet)


def logdet_dexp(step: WalkStep, direction: str = "forward") -> float:
    """log det of the exponential-map differential along the solved geodesic.

    Transports a g-orthonormal frame from the start, assembles the curvature
    operator at the collocation nodes, and solves the matrix Jacobi ODE.
    The backward value reuses the forward frame mirrored in time, which is
    parallel along the reversed geodesic by construction.
    """
    if step.path is None or step.end is None:
        raise ValueError("logdet_dexp needs a successfully solved proposal")
    path = step.path
    n = step.start.n
    R = _ensure_curvature(step)
    if direction == "forward":
        data = [(seg.ell, seg.vel.nodes, Rk) for seg, Rk in zip(path.segments, R)]
    elif direction == "backward":
        data = [(seg.ell, seg.vel.nodes, Rk[::-1])
                for seg, Rk in zip(reversed(path.segments), reversed(R))]
    else:
        raise ValueError("direction must be 'forward' or 'backward'")
    return _solve_jacobi(data, path.ell, n)


def _ensure_curvature(step: WalkStep):
    if step._R_cache is None:
        step.path.node_geometry()
        X0 = step.start.chol_inv.T
        frames, _ = _transport_frame(step.path, X0)
        step._R_cache = _curvature_at_nodes(step.path, frames)
    return step._R_cache


def logdet_dexp_pair(step: WalkStep):
    """(forward, backward) log det in one stacked Jacobi solve when possible.

    The two directions share the transported frame; on a single-segment path
    they are solved as one ODE with the doubled state (Psi_fwd, Psi_bwd).
    """
    R = _ensure_curvature(step)
    path = step.path
    n = step.start.n
    if len(path.segments) > 1:
        return logdet_dexp(step, "forward"), logdet_dexp(step, "backward")
    seg = path.segments[0]
    nodes = seg.vel.nodes
    Rpair = np.stack([R[0], R[0][::-1]], axis=1)  # (d, 2, n, n)

    def F(dY, Y, ts):
        idx = np.clip(np.searchsorted(nodes, ts - 1e-13 * max(seg.ell, 1.0)),
                      0, len(nodes) - 1)
        Psi = Y.reshape(-1, 2, n, n)
        return -np.einsum("ksij,ksjl->ksil", Rpair[idx], Psi).reshape(
            len(ts), 2 * n * n)

    from .collocation import collocation_second_order

    psi0 = np.zeros(2 * n * n)
    dpsi0 = np.concatenate([(np.eye(n) / path.ell).flatten()] * 2)
    cfg = CollocationConfig(degree=len(nodes), ell=seg.ell, tol=1e-10, p_norm=2)
    pos, _ = collocation_second_order(F, psi0, dpsi0, cfg, batched=True)
    end = pos.end_value().reshape(2, n, n)
    out = []
    for k in range(2):
        sign, logdet = np.linalg.slogdet(end[k])
        if sign <= 0 or not np.isfinite(logdet):
            raise SingularJacobiError("Psi(ell) numerically singular")
        out.append(float(logdet))
    return out[0], out[1]


def transition_log_density(p_from: ManifoldPoint, v, p_to: ManifoldPoint,
                           logdet: float, h: float) -> float:
    """log p(x->y) for the single geodesic branch with unscaled tangent v."""
    n = p_from.n
    dv = v - 0.5 * h * p_from.drift
    sq = float(np.sum((p_from.A_x @ dv) ** 2))
    return (-logdet + 0.5 * p_to.log_det_metric
            - 0.5 * n * math.log(2.0 * math.pi * h) - sq / (2.0 * h))


def metropolis_step(p: ManifoldPoint, cfg: WalkConfig, rng):
    """One filtered step; returns (next point, WalkStep record)."""
    step = propose(p, cfg, rng)
    if step.fail_reason is None:
        try:
            step.logdet_fwd, step.logdet_rev = logdet_dexp_pair(step)
        except SingularJacobiError:
            step.fail_reason = "singular"
        except NonContractionError:
            step.fail_reason = "non_contraction"
        except (GeodesicExitError, InteriorError, FactorizationError):
            step.fail_reason = "exit"
    if step.fail_reason is not None:
        return p, step
    step.log_fwd = transition_log_density(step.start, step.v_x, step.end,
                                          step.logdet_fwd, step.h)
    step.log_rev = transition_log_density(step.end, step.v_y, step.start,
                                          step.logdet_rev, step.h)
    log_ratio = step.log_rev - step.log_fwd
    if not np.isfinite(log_ratio):
        step.fail_reason = "singular"
        return p, step
    if math.log(rng.uniform()) < log_ratio:
        step.accepted = True
        return step.end, step
    return p, step


@dataclass
class ChainStats:
    """Summary of one chain run; serializes to the stats JSON schema."""

    steps: int = 0
    accepted: int = 0
    fail_counts: dict = field(default_factory=lambda: {
        "exit": 0, "singular": 0, "non_contraction": 0})
    v_gamma_quantiles: list = field(default_factory=list)
    log_ratio_quantiles: list = field(default_factory=list)
    wall_time_s: float = 0.0
    seed: int | None = None
    h: float = 0.0

    QUANTS = (0.1, 0.25, 0.5, 0.75, 0.9)

    @property
    def accept_rate(self) -> float:
        return self.accepted / self.steps if self.steps else 0.0

    @property
    def zero_acceptance(self) -> bool:
        return self.steps > 0 and self.accepted == 0

    def to_dict(self) -> dict:
        return {
            "accept_rate": self.accept_rate,
            "fail_counts": dict(self.fail_counts),
            "v_gamma_quantiles": list(self.v_gamma_quantiles),
            "log_ratio_quantiles": list(self.log_ratio_quantiles),
            "wall_time_s": self.wall_time_s,
            "seed": self.seed,
            "h": self.h,
            "steps": self.steps,
            "warning_zero_acceptance": self.zero_acceptance,
        }


def run_chain(P: Polytope, start, steps: int, cfg: WalkConfig, rng,
              seed: int | None = None):
    """Run burn-in plus `steps` filtered steps; record every thin-th state.

    Returns (samples array of shape (steps // thin, n), ChainStats,
    recorded WalkSteps when cfg.record_diagnostics).
    """
    p = start if isinstance(start, ManifoldPoint) else make_point(P, start)
    h = cfg.resolve_h(P.n)
    burnin = cfg.burnin if cfg.burnin is not None else 10 * math.ceil(1.0 / h)
    t0 = time.perf_counter()
    stats = ChainStats(h=h, seed=seed)
    samples = []
    records = []
    v_gammas = []
    log_ratios = []
    for _ in range(burnin):
        p, _ = metropolis_step(p, cfg, rng)
    for k in range(steps):
        p, step = metropolis_step(p, cfg, rng)
        stats.steps += 1
        if step.accepted:
            stats.accepted += 1
        if step.fail_reason is not None:
            stats.fail_counts[step.fail_reason] += 1
        if np.isfinite(step.v_gamma):
            v_gammas.append(step.v_gamma)
        if np.isfinite(step.log_ratio):
            log_ratios.append(step.log_ratio)
        if (k + 1) % cfg.thin == 0:
            samples.append(p.x.copy())
        if cfg.record_diagnostics:
            records.append(step)
    stats.wall_time_s = time.perf_counter() - t0
    if v_gammas:
        stats.v_gamma_quantiles = [float(q) for q in
                                   np.quantile(v_gammas, ChainStats.QUANTS)]
    if log_ratios:
        stats.log_ratio_quantiles = [float(q) for q in
                                     np.quantile(log_ratios, ChainStats.QUANTS)]
    out = np.array(samples) if samples else np.empty((0, P.n))
    return out, stats, records


def dikin_walk_step(p: ManifoldPoint, radius: float, rng) -> ManifoldPoint:
    """One Metropolis-filtered Dikin-ellipsoid step of radius r.

    Proposal y = x + (r/sqrt(n)) L^{-T} z; the filter ratio is
    sqrt(det g(y)/det g(x)) * exp(-(n/(2 r^2)) (||y-x||_y^2 - ||y-x||_x^2)).
    Returns p itself when the proposal is rejected or exterior.
    """
    P = p.polytope
    n = p.n
    z = rng.standard_normal(n)
    if radius == 0.0:
        return p
    d = (radius / math.sqrt(n)) * (p.chol_inv.T @ z)
    y = p.x + d
    if not P.contains(y):
        return p
    try:
        q = make_point(P, y)
    except (InteriorError, FactorizationError):
        return p
    nx = float(np.sum((p.A_x @ d) ** 2))
    ny = float(np.sum((q.A_x @ d) ** 2))
    log_ratio = 0.5 * (q.log_det_metric - p.log_det_metric) \
        - 0.5 * n / radius ** 2 * (ny - nx)
    if math.log(rng.uniform()) < log_ratio:
        return q
    return p


def run_dikin_chain(P: Polytope, start, steps: int, radius: float, rng,
                    burnin: int = 0, thin: int = 1):
    """Dikin-walk chain runner mirroring run_chain's recording conventions."""
    p = start if isinstance(start, ManifoldPoint) else make_point(P, start)
    accepted = 0
    samples = []
    for _ in range(burnin):
        p = dikin_walk_step(p, radius, rng)
    for k in range(steps):
        q = dikin_walk_step(p, radius, rng)
        if q is not p:
            accepted += 1
        p = q
        if (k + 1) % thin == 0:
            samples.append(p.x.copy())
    out = np.array(samples) if samples else np.empty((0, P.n))
    return out, accepted / steps if steps else 0.0

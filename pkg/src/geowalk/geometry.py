"""Closed-form differential geometry of the log-barrier manifold.

All formulas are in Euclidean coordinates with the shorthand of the
polytope module: s_u = A_x u, P_x the projection onto the column space of
A_x.  The connection is

    Gamma(u, v) = -g^{-1} A_x^T (s_u * s_v),

so geodesics satisfy gamma'' = g^{-1} A_gamma^T s_{gamma'}^2 and parallel
transport dv/dt = g^{-1} A_gamma^T (s_{gamma'} * s_v).  The curvature
tensor, Ricci curvature and the frame-coordinate curvature operator R(t)
(whose trace is Ric(gamma')) are evaluated without forming any m x m
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polytope import ManifoldPoint, Polytope, PolytopeError


class FrameError(ValueError):
    """Frame columns are not g-orthonormal within tolerance."""


class UnboundedDirectionError(PolytopeError):
    """A chord of the polytope does not hit the boundary (unbounded direction)."""


def christoffel_action(p: ManifoldPoint, u, v):
    """Bilinear Christoffel contraction Gamma(u, v); symmetric in (u, v)."""
    su = p.A_x @ u
    sv = p.A_x @ v
    return -p.solve_metric(p.A_x.T @ (su * sv))


def geodesic_rhs(p: ManifoldPoint, v):
    """Geodesic acceleration gamma'' = g^{-1} A_x^T s_v^2 (= -Gamma(v, v))."""
    sv = p.A_x @ v
    return p.solve_metric(p.A_x.T @ (sv * sv))


def parallel_transport_rhs(p: ManifoldPoint, curve_velocity, v):
    """Time derivative of a vector transported along a curve with the given velocity."""
    sc = p.A_x @ curve_velocity
    sv = p.A_x @ v
    return p.solve_metric(p.A_x.T @ (sc * sv))


def riemann_inner(p: ManifoldPoint, u, v, w, z) -> float:
    """<R(u,v)w, z> = (s_u s_w)^T P (s_v s_z) - (s_u s_z)^T P (s_v s_w)."""
    su = p.A_x @ u
    sv = p.A_x @ v
    sw = p.A_x @ w
    sz = p.A_x @ z
    return float((su * sw) @ p.project(sv * sz) - (su * sz) @ p.project(sv * sw))


def ricci(p: ManifoldPoint, u) -> float:
    """Ric(u) = s_u^T P^(2) s_u - sigma^T P s_u^2, with P^(2) the squared entries.

    The first term is tr((g^{-1} A_x^T S_u A_x)^2), evaluated through the
    Cholesky factor so the m x m projection never materializes.
    """
    su = p.A_x @ u
    C = p.A_x.T @ (p.A_x * su[:, None])
    li = p.chol_inv
    Z = li @ C @ li.T
    term1 = float(np.einsum("ij,ji->", Z, Z))
    term2 = float(p.leverage @ p.project(su * su))
    return term1 - term2


def orthonormal_frame(p: ManifoldPoint):
    """An n x n matrix whose columns are g-orthonormal at p (L^{-T})."""
    return p.chol_inv.T.copy()


def gram_schmidt(p: ManifoldPoint, X):
    """Re-orthonormalize frame columns in the g(p) inner product."""
    Q = np.array(X, dtype=float)
    n = Q.shape[1]
    for i in range(n):
        for j in range(i):
            Q[:, i] -= p.metric_inner(Q[:, j], Q[:, i]) * Q[:, j]
        nrm = p.metric_norm(Q[:, i])
        if nrm <= 0.0 or not np.isfinite(nrm):
            raise FrameError("frame degenerated during re-orthonormalization")
        Q[:, i] /= nrm
    return Q


def frame_orthonormality_error(p: ManifoldPoint, X) -> float:
    """max |X^T g X - I| over entries."""
    G = (p.A_x @ X).T @ (p.A_x @ X)
    return float(np.abs(G - np.eye(X.shape[1])).max())


@dataclass(frozen=True)
class CurvatureOperator:
    """Curvature operator R(t) of a geodesic in a g-orthonormal frame.

    Rt[i, j] = <R(X_i, gamma') gamma', X_j>; symmetric, with
    trace(Rt) = Ric(gamma').
    """

    Rt: np.ndarray
    frame: np.ndarray

    @property
    def ric(self) -> float:
        return float(np.trace(self.Rt))


@dataclass(frozen=True)
class GeodesicSpec:
    """Initial data of one walk geodesic: start, gamma'(0), interval sqrt(nh)."""

    start: ManifoldPoint
    velocity: np.ndarray
    length: float
    step_size: float

    def __post_init__(self):
        if not (self.length > 0.0 and np.isfinite(self.velocity).all()):
            raise ValueError("geodesic needs positive length and finite velocity")


def frame_curvature_matrix(p: ManifoldPoint, curve_velocity, frame,
                           ortho_tol: float = 1e-6) -> CurvatureOperator:
    """Curvature operator entries R_ij = <R(X_i, gamma')gamma', X_j>.

    The frame columns must be g-orthonormal within ortho_tol.
    """
    err = frame_orthonormality_error(p, frame)
    if err > ortho_tol:
        raise FrameError(f"frame orthonormality error {err:.2e} > {ortho_tol:.1e}")
    c = p.A_x @ curve_velocity
    Q = p.A_x @ frame                      # columns s_{X_i}
    Zc = Q * c[:, None]
    PZc = p.A_x @ (p.metric_inv @ (p.A_x.T @ Zc))
    term1 = Zc.T @ PZc
    r = p.project(c * c)
    term2 = (Q * r[:, None]).T @ Q
    Rt = term1 - term2
    return CurvatureOperator(Rt=0.5 * (Rt + Rt.T), frame=np.asarray(frame))


def auxiliary_V(slack_velocities, h: float, n: int) -> float:
    """Geodesic quality functional: max over samples of
    ||s_{gamma'}||_4 / n^{-1/4} + ||s_{gamma'}||_inf / (sqrt(log n / n) + sqrt h).

    `slack_velocities` is a (k, m) array of A_gamma(t) gamma'(t) rows sampled
    along the solved geodesic (collocation nodes plus a uniform grid).
    Compared against the diagnostic threshold V0 = 48.
    """
    sv = np.atleast_2d(np.asarray(slack_velocities, dtype=float))
    if sv.size == 0:
        return 0.0
    l4 = (sv ** 4).sum(axis=1) ** 0.25
    linf = np.abs(sv).max(axis=1)
    denom = np.sqrt(np.log(n) / n) + np.sqrt(h)
    return float(np.max(l4 * n ** 0.25 + linf / denom))


V0 = 48.0


def chord_intersections(P: Polytope, x, u):
    """Parameters (t_min < 0 < t_max) where the line x + t u leaves {Ax > b}.

    Computed from slack ratios; raises UnboundedDirectionError when the line
    never exits in one of the two directions.
    """
    s = P.A @ x - P.b
    w = P.A @ u
    pos = w > 0
    neg = w < 0
    if not pos.any() or not neg.any():
        raise UnboundedDirectionError("polytope unbounded along this chord")
    t_min = float(np.max(-s[pos] / w[pos]))
    t_max = float(np.min(s[neg] / (-w[neg])))
    return t_min, t_max


def hilbert_distance(P: Polytope, x, y) -> float:
    """Hilbert (cross-ratio) distance log(1 + |x-y||p-q| / (|p-x||y-q|)).

    p and q are the boundary points of the chord through x and y, found
    analytically from slack ratios.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (P.contains(x) and P.contains(y)):
        raise PolytopeError("hilbert_distance needs two interior points")
    u = y - x
    nu = np.linalg.norm(u)
    if nu == 0.0:
        return 0.0
    t_min, t_max = chord_intersections(P, x, u)
    # order along the chord: p (t_min) < x (0) < y (1) < q (t_max)
    ratio = (1.0 * (t_max - t_min)) / ((-t_min) * (t_max - 1.0))
    return float(np.log1p(ratio))

"""Physarum dynamics for linear programs, driven by the collocation solver.

For min c^T x s.t. Ax = b, x > 0 the dynamics

    dx/dt = W A^T (A W A^T)^{-1} b - x,      W = diag(x / c),

converge to an optimal solution while keeping Ax = b invariant.  The solve
runs in y = ln x coordinates,

    dy/dt = diag(1/c) A^T (A diag(e^y / c) A^T)^{-1} b - 1,

which keeps positivity structurally and is the form whose Lipschitz
behaviour matches the collocation step analysis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .collocation import CollocationConfig, collocation_multistep


class PhysarumError(ValueError):
    """Invalid problem data or a breakdown of the dynamics solve."""


class OptimalFaceError(PhysarumError):
    """Components underflowed (y -> -inf): the dynamics reached the optimal face."""


@dataclass(frozen=True)
class PhysarumProblem:
    """LP data min c^T x, Ax = b, x > 0 with a strictly positive feasible start."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=float)
        b = np.ascontiguousarray(self.b, dtype=float)
        c = np.ascontiguousarray(self.c, dtype=float)
        x0 = np.ascontiguousarray(self.x0, dtype=float)
        m, n = A.shape
        if b.shape != (m,) or c.shape != (n,) or x0.shape != (n,):
            raise PhysarumError("inconsistent dimensions")
        if np.linalg.matrix_rank(A) < m:
            raise PhysarumError("A must have full row rank")
        if not np.all(c > 0.0):
            raise PhysarumError("c must be strictly positive")
        if not np.all(x0 > 0.0):
            raise PhysarumError("x0 must be strictly positive")
        if np.abs(A @ x0 - b).max() > 1e-10 * max(1.0, np.abs(b).max()):
            raise PhysarumError("x0 must satisfy Ax0 = b within 1e-10")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "x0", x0)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def load_physarum_problem(source) -> PhysarumProblem:
    """Read a problem document {"A": [[...]], "b": [...], "c": [...], "x0": [...]}."""
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source) as fh:
            doc = json.load(fh)
    try:
        return PhysarumProblem(np.array(doc["A"], dtype=float),
                               np.array(doc["b"], dtype=float),
                               np.array(doc["c"], dtype=float),
                               np.array(doc["x0"], dtype=float))
    except KeyError as exc:
        raise PhysarumError(f"problem document missing field {exc}") from exc


def physarum_rhs(x, prob: PhysarumProblem) -> np.ndarray:
    """dx/dt = W A^T (A W A^T)^{-1} b - x with W = diag(x/c).

    Satisfies A (dx/dt) = b - Ax, so the affine constraint is invariant.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise PhysarumError("physarum_rhs needs x > 0 componentwise")
    wdiag = x / prob.c
    M = (prob.A * wdiag[None, :]) @ prob.A.T
    try:
        q = np.linalg.solve(M, prob.b)
    except np.linalg.LinAlgError as exc:
        raise OptimalFaceError("A W A^T singular (support collapsed)") from exc
    return wdiag * (prob.A.T @ q) - x


def _log_rhs(prob: PhysarumProblem):
    """Batched dy/dt for y = ln x."""
    A = prob.A
    c = prob.c

    def F(Y, ts):
        out = np.empty_like(Y)
        for i, y in enumerate(Y):
            w = np.exp(y) / c
            if not np.all(np.isfinite(w)):
                raise OptimalFaceError("weights overflowed in log coordinates")
            M = (A * w[None, :]) @ A.T
            try:
                q = np.linalg.solve(M, prob.b)
            except np.linalg.LinAlgError as exc:
                raise OptimalFaceError(
                    "A W A^T singular: dynamics reached the optimal face") from exc
            out[i] = (A.T @ q) / c - 1.0
        return out

    return F


@dataclass
class PhysarumTrajectory:
    """Checkpointed solution: times, states, objective and feasibility residual."""

    times: np.ndarray
    states: np.ndarray
    objective: np.ndarray
    feasibility: np.ndarray
    monotone_after: float
    warnings: list = field(default_factory=list)

    @property
    def final_x(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_objective(self) -> float:
        return float(self.objective[-1])


def physarum_solve(prob: PhysarumProblem, T: float, eps: float = 1e-8,
                   checkpoints: int = 65, cfg: CollocationConfig | None = None,
                   monotone_tol: float = 1e-9) -> PhysarumTrajectory:
    """Integrate the dynamics to time T in log coordinates.

    Returns a trajectory sampled at `checkpoints` uniform times with the
    objective c^T x and feasibility residual ||Ax - b||_inf recorded at each;
    a warning is logged when c^T x increases by more than monotone_tol after
    its initial transient.
    """
    if T < 0.0:
        raise PhysarumError("T must be nonnegative")
    cfg = cfg or CollocationConfig(tol=min(eps, 1e-6), ell=0.25, p_norm=np.inf)
    y0 = np.log(prob.x0)
    if T == 0.0:
        times = np.array([0.0])
        states = prob.x0[None, :]
    else:
        _, curve = collocation_multistep(_log_rhs(prob), y0, T, cfg, batched=True)
        times = np.linspace(0.0, T, checkpoints)
        states = np.exp(np.stack([curve.value(t) for t in times]))
    objective = states @ prob.c
    feasibility = np.abs(states @ prob.A.T - prob.b).max(axis=1)

    warnings = []
    monotone_after = 0.0
    best = math.inf
    for t, val in zip(times, objective):
        if val > best + monotone_tol:
            monotone_after = float(t)
            warnings.append(
                f"objective increased by {val - best:.3e} at t={t:.4g}")
        best = min(best, val)
    return PhysarumTrajectory(times=times, states=states, objective=objective,
                              feasibility=feasibility,
                              monotone_after=monotone_after, warnings=warnings)


def vertex_enumeration_opt(prob: PhysarumProblem, atol: float = 1e-9) -> float:
    """Brute-force LP optimum over basic feasible solutions (n <= ~12 only)."""
    from itertools import combinations

    m, n = prob.m, prob.n
    best = math.inf
    for cols in combinations(range(n), m):
        B = prob.A[:, cols]
        try:
            xb = np.linalg.solve(B, prob.b)
        except np.linalg.LinAlgError:
            continue
        if np.all(xb >= -atol):
            x = np.zeros(n)
            x[list(cols)] = np.maximum(xb, 0.0)
            best = min(best, float(prob.c @ x))
    if not np.isfinite(best):
        raise PhysarumError("no basic feasible solution found")
    return best

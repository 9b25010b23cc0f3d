"""Independent brute-force verification of solver outputs.

Everything here works directly on F, G, the inputs and the trajectory
values, never on the canonical decomposition, so a passing residual is
evidence about the closed-form evaluation rather than a restatement of
it. Three cross-checks are provided: residual substitution into the
original difference equations (standard and fractional), the plain
state recursion when F is invertible, and a global stacked least-squares
solve that needs no decomposition at all.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import fracops
from .errors import OracleInapplicable, StructuralError
from .pencil import Pencil, _readonly
from .solver import (
    FRACTIONAL_RESIDUAL_FACTOR,
    STANDARD_RESIDUAL_FACTOR,
    InputSignal,
    Trajectory,
)


@dataclass(frozen=True)
class ResidualReport:
    """Per-step equation residuals against an explicit bound."""

    max_residual: float
    per_k: np.ndarray
    bound_used: float
    passed: bool

    def __post_init__(self):
        object.__setattr__(self, "per_k", _readonly(np.asarray(self.per_k)))

    def __bool__(self) -> bool:
        return self.passed

    def worst_offenders(self, count: int = 3) -> list[tuple[int, float]]:
        order = np.argsort(self.per_k)[::-1][:count]
        return [(int(i), float(self.per_k[i])) for i in order]


def _states(traj) -> np.ndarray:
    states = traj.states if isinstance(traj, Trajectory) else np.asarray(traj)
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[0] < 1:
        raise StructuralError("trajectory must be a nonempty 2-D state sequence")
    return states


def residual_standard(
    pencil: Pencil, traj, input: InputSignal, bound: float | None = None
) -> ResidualReport:
    """Residuals |F Y_{k+1} - G Y_k - V_k| for k = 0 .. K-1."""
    Y = _states(traj)
    K = Y.shape[0] - 1
    if K < 1:
        raise StructuralError("need at least two states to form a residual")
    V = np.asarray(input.values)
    if V.shape[0] < K or V.shape[1] != pencil.m:
        raise StructuralError(
            f"inputs must provide {K} samples of width {pencil.m}"
        )
    if bound is None:
        bound = STANDARD_RESIDUAL_FACTOR * (1.0 + float(np.max(np.abs(V))))
    resid = Y[1:] @ pencil.F.T - Y[:-1] @ pencil.G.T - V[:K]
    per_k = np.linalg.norm(resid, axis=1)
    worst = float(per_k.max())
    return ResidualReport(
        max_residual=worst, per_k=per_k, bound_used=float(bound), passed=worst <= bound
    )


def residual_fractional(
    pencil: Pencil,
    traj,
    input: InputSignal,
    n,
    bound: float | None = None,
) -> ResidualReport:
    """Residuals |F (nabla^n Y)_k - G Y_k - V_k| for k = 1 .. K.

    The fractional difference is recomputed from the trajectory itself
    through the fracops composition, which keeps this check fully
    independent of the closed-form evaluation.
    """
    n = float(n)
    if not 0.0 < n <= 1.0:
        raise StructuralError(f"order must lie in (0, 1], got {n}")
    Y = _states(traj)
    K = Y.shape[0] - 1
    if K < 1:
        raise StructuralError("need at least two states to form a residual")
    V = np.asarray(input.values)
    if V.shape[0] < K + 1 or V.shape[1] != pencil.m:
        raise StructuralError(
            f"inputs must provide {K + 1} samples of width {pencil.m}"
        )
    if bound is None:
        bound = FRACTIONAL_RESIDUAL_FACTOR * (1.0 + float(np.max(np.abs(V))))
    if n == 1.0:
        summed = Y
    else:
        summed = fracops.nabla_fractional_sum_sequence(Y, 1.0 - n)
    nabla = summed[1:] - summed[:-1]
    resid = nabla @ pencil.F.T - Y[1:] @ pencil.G.T - V[1 : K + 1]
    per_k = np.linalg.norm(resid, axis=1)
    worst = float(per_k.max())
    return ResidualReport(
        max_residual=worst, per_k=per_k, bound_used=float(bound), passed=worst <= bound
    )


def recursive_solve_invertible(
    pencil: Pencil, Y0, input: InputSignal, K: int
) -> Trajectory:
    """Iterate Y_{k+1} = F^{-1} (G Y_k + V_k); the invertible-F oracle."""
    F = pencil.F
    sv = np.linalg.svd(F, compute_uv=False)
    if sv.size == 0 or sv[-1] <= np.finfo(float).eps * max(1.0, sv[0]) * pencil.m:
        raise OracleInapplicable("F is numerically singular; recursion undefined")
    cond_F = float(sv[0] / sv[-1])
    K = int(K)
    if K < 0:
        raise StructuralError("horizon must be nonnegative")
    V = np.asarray(input.values)
    if K > 0 and (V.shape[0] < K or V.shape[1] != pencil.m):
        raise StructuralError(f"inputs must provide {K} samples of width {pencil.m}")
    Y0 = np.asarray(Y0, dtype=float).reshape(-1)
    if Y0.shape[0] != pencil.m:
        raise StructuralError(f"Y0 must have length {pencil.m}")
    states = np.empty((K + 1, pencil.m))
    states[0] = Y0
    lu_piv = scipy.linalg.lu_factor(F)
    for k in range(K):
        states[k + 1] = scipy.linalg.lu_solve(lu_piv, pencil.G @ states[k] + V[k])
    return Trajectory(
        states=states,
        outputs=None,
        kind="standard",
        meta={"solver": "recursive_oracle", "cond_F": cond_F},
    )


def stacked_solve(
    pencil: Pencil,
    Y0_constraint,
    input: InputSignal,
    K: int,
) -> Trajectory:
    """Global least-squares solve of the stacked difference equations.

    Builds one linear system over all states jointly from
    ``F Y_{k+1} - G Y_k = V_k`` across the whole supplied input horizon
    (plus an optional pin of the initial state) and solves it in least
    squares. The rank diagnostic exposes the solution-space deficiency
    of singular systems; the trailing steps that depend on inputs beyond
    the horizon are the underdetermined ones, so comparisons against the
    closed form should stop before them. Returns the first K + 1 states.
    """
    m = pencil.m
    K = int(K)
    if K < 0:
        raise StructuralError("horizon must be nonnegative")
    V = np.asarray(input.values)
    if V.shape[1] != m:
        raise StructuralError(f"inputs must have width {m}")
    n_eq = V.shape[0]
    if n_eq < K:
        raise StructuralError(
            f"stacked solve needs inputs through index {K - 1}, got {n_eq - 1}"
        )
    n_states = n_eq + 1
    rows = n_eq * m + (m if Y0_constraint is not None else 0)
    A = np.zeros((rows, n_states * m))
    b = np.zeros(rows)
    for k in range(n_eq):
        r = slice(k * m, (k + 1) * m)
        A[r, (k + 1) * m : (k + 2) * m] = pencil.F
        A[r, k * m : (k + 1) * m] = -pencil.G
        b[k * m : (k + 1) * m] = V[k]
    if Y0_constraint is not None:
        Y0c = np.asarray(Y0_constraint, dtype=float).reshape(-1)
        if Y0c.shape[0] != m:
            raise StructuralError(f"Y0 constraint must have length {m}")
        A[n_eq * m :, :m] = np.eye(m)
        b[n_eq * m :] = Y0c
    sol, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.linalg.norm(A @ sol - b))
    states = sol.reshape((n_states, m))[: K + 1]
    return Trajectory(
        states=states,
        outputs=None,
        kind="standard",
        meta={
            "solver": "stacked_oracle",
            "stacked_residual": residual,
            "rank": int(rank),
            "rank_deficiency": int(n_states * m - rank),
            "solved_through": n_states - 1,
        },
    )

"""Causality analysis of singular discrete-time systems.

The trailing block of the standard solution reads inputs at future
steps whenever the nilpotent part acts on them, so causality between
state and inputs holds iff the shaped inputs are annihilated:
``H_q P_2 B = 0``. Output causality is weaker: the future-dependent
columns only need to fall in the right null space of the output map.
The fractional variant is causal by construction because its forcing
term reads inputs with indices at most k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .pencil import DEFAULT_TOL, WeierstrassForm
from .solver import DescriptorSystem

FRACTIONAL_NOTE = (
    "causal by construction: the fractional forcing term reads inputs "
    "with indices <= k only"
)


@dataclass(frozen=True)
class StateCausality:
    causal: bool
    witness: np.ndarray  # H_q P_2 B
    witness_norm: float
    threshold: float

    def __bool__(self) -> bool:
        return self.causal


@dataclass(frozen=True)
class OutputCausality:
    causal: bool
    witness: np.ndarray  # [Q_q H_q P_2 B ... Q_q H_q^{q*-1} P_2 B]
    violation_norm: float  # |C @ witness|
    threshold: float

    def __bool__(self) -> bool:
        return self.causal


@dataclass(frozen=True)
class CausalityReport:
    state_causal: bool
    output_causal: bool
    witness_state: np.ndarray
    witness_state_norm: float
    witness_output: np.ndarray
    output_violation_norm: float
    tol: float
    fractional_note: str = FRACTIONAL_NOTE


def _check_B(wf: WeierstrassForm, B) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.ndim != 2 or B.shape[0] != wf.m:
        raise StructuralError(f"B must have {wf.m} rows, got shape {B.shape}")
    return B


def check_state_causality(
    wf: WeierstrassForm, B, tol: float = DEFAULT_TOL
) -> StateCausality:
    """Decide whether states depend only on past inputs under V = B U.

    Causal iff the witness ``H_q P_2 B`` vanishes within a tolerance
    scaled by ``|P_2| |B|``. The witness matrix is returned either way;
    any nonzero column names an input channel whose future values reach
    the current state.
    """
    B = _check_B(wf, B)
    witness = wf.H_q @ wf.P_2 @ B
    norm = float(np.linalg.norm(witness)) if witness.size else 0.0
    threshold = tol * float(np.linalg.norm(wf.P_2) * np.linalg.norm(B))
    return StateCausality(
        causal=norm <= threshold,
        witness=witness,
        witness_norm=norm,
        threshold=threshold,
    )


def output_witness(wf: WeierstrassForm, B) -> np.ndarray:
    """Stacked future-input columns [Q_q H_q P_2 B ... Q_q H_q^{q*-1} P_2 B].

    Powers start at 1: the input at the current step counts as past.
    Empty when q_star <= 1 (no future dependence at all).
    """
    B = _check_B(wf, B)
    blocks = []
    Hp = np.array(wf.H_q)
    for _ in range(1, wf.q_star):
        blocks.append(wf.Q_q @ Hp @ wf.P_2 @ B)
        Hp = Hp @ wf.H_q
    if not blocks:
        return np.zeros((wf.m, 0))
    return np.hstack(blocks)


def check_output_causality(
    wf: WeierstrassForm, B, C, tol: float = DEFAULT_TOL
) -> OutputCausality:
    """Decide whether outputs depend only on past inputs under V = B U.

    Builds the stacked witness and tests whether every column lies in
    the right null space of C, through the scaled norm of ``C @ M``.
    An empty witness counts as causal.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim == 1:
        C = C[None, :]
    if C.shape[1] != wf.m:
        raise StructuralError(f"C must have {wf.m} columns, got shape {C.shape}")
    M = output_witness(wf, B)
    if M.size == 0:
        return OutputCausality(
            causal=True, witness=M, violation_norm=0.0, threshold=0.0
        )
    violation = float(np.linalg.norm(C @ M))
    threshold = tol * float(np.linalg.norm(C) * np.linalg.norm(M))
    return OutputCausality(
        causal=violation <= threshold,
        witness=M,
        violation_norm=violation,
        threshold=threshold,
    )


def maximal_causal_B(wf: WeierstrassForm, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the largest state-causal input subspace.

    Returns an m-by-r_1 matrix whose columns span the kernel of
    ``H_q P_2``, with ``r_1 = m - rank(H_q P_2)``. Shaping inputs through
    it always passes :func:`check_state_causality`.
    """
    A = wf.H_q @ wf.P_2
    if A.size == 0:
        return np.eye(wf.m)
    U, s, Vh = np.linalg.svd(A)
    scale = float(s[0]) if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > tol * max(scale, 1.0)))
    return Vh[rank:].conj().T.real


def fractional_causality(sys: DescriptorSystem | None = None) -> str:
    """Constant verdict for the fractional system: causal by construction."""
    return FRACTIONAL_NOTE


def causality_report(
    wf: WeierstrassForm, B, C, tol: float = DEFAULT_TOL
) -> CausalityReport:
    """Full report combining the state and output checks."""
    state = check_state_causality(wf, B, tol)
    output = check_output_causality(wf, B, C, tol)
    return CausalityReport(
        state_causal=state.causal,
        output_causal=output.causal,
        witness_state=state.witness,
        witness_state_norm=state.witness_norm,
        witness_output=output.witness,
        output_violation_norm=output.violation_norm,
        tol=tol,
    )

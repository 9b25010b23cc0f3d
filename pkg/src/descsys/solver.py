"""Closed-form trajectories of singular linear discrete-time systems.

Evaluates the canonical-coordinate solution formulas for both the
standard system ``F Y_{k+1} = G Y_k + V_k`` and its backward fractional
variant ``F (nabla^n Y)_k = G Y_k + V_k``, decides consistency of
initial states, and gates fractional runs on the existence condition
(distinct finite eigenvalues inside the open unit disk).

The standard solution reads future inputs through ``k + q_star - 1`` in
its trailing block, so every entry point enforces an explicit horizon
contract instead of padding silently; zero padding is available behind
a flag. Trajectories are evaluated per step from the closed forms with
cached transition powers and series values, never by recursion; the
recursion lives in the oracle module as the independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from . import _kernels, fracops
from .errors import (
    HorizonError,
    InconsistentICError,
    SolvabilityError,
    StructuralError,
)
from .pencil import (
    DEFAULT_CLUSTER_REL,
    DEFAULT_TOL,
    Pencil,
    WeierstrassForm,
    _cluster_points,
    _readonly,
    weierstrass_decompose,
)

#: default factor for the scale-aware consistency threshold
CONSISTENCY_TOL = 1e-8

#: residual bounds attached to trajectories, relative to 1 + |V|_inf
STANDARD_RESIDUAL_FACTOR = 1e-8
FRACTIONAL_RESIDUAL_FACTOR = 1e-6


@dataclass(frozen=True)
class InputSignal:
    """Finite input sequence V_0 .. V_{k_max} (or U_0 .. U_{k_max})."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise StructuralError("input signal must hold at least one sample")
        if vals.dtype.kind not in "fc":
            vals = vals.astype(float)
        if not np.all(np.isfinite(vals)):
            raise StructuralError("input signal contains non-finite entries")
        object.__setattr__(self, "values", _readonly(vals))

    @property
    def k_max(self) -> int:
        return self.values.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @classmethod
    def constant(cls, vec, k_max: int) -> "InputSignal":
        vec = np.atleast_1d(np.asarray(vec, dtype=float))
        return cls(np.tile(vec, (k_max + 1, 1)))

    @classmethod
    def zeros(cls, dim: int, k_max: int) -> "InputSignal":
        return cls(np.zeros((k_max + 1, dim)))


@dataclass(frozen=True)
class DescriptorSystem:
    """Pencil plus output map, optional input shaping and attached form."""

    pencil: Pencil
    C: np.ndarray
    B: np.ndarray | None = None
    wf: WeierstrassForm | None = None

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 2 or C.shape[1] != self.pencil.m:
            raise StructuralError(
                f"C must have {self.pencil.m} columns, got shape {C.shape}"
            )
        object.__setattr__(self, "C", _readonly(C))
        if self.B is not None:
            B = np.asarray(self.B, dtype=float)
            if B.ndim != 2 or B.shape[0] != self.pencil.m:
                raise StructuralError(
                    f"B must have {self.pencil.m} rows, got shape {B.shape}"
                )
            object.__setattr__(self, "B", _readonly(B))
        if self.wf is not None and self.wf.m != self.pencil.m:
            raise StructuralError("attached decomposition dimension mismatch")

    @property
    def m(self) -> int:
        return self.pencil.m

    @property
    def n_out(self) -> int:
        return self.C.shape[0]

    @property
    def input_dim(self) -> int:
        return self.B.shape[1] if self.B is not None else self.pencil.m

    def with_weierstrass(
        self,
        tol: float = DEFAULT_TOL,
        *,
        cluster_tol: float | None = None,
        seed: int = 0,
    ) -> "DescriptorSystem":
        """Return a copy with the canonical decomposition attached."""
        if self.wf is not None:
            return self
        wf = weierstrass_decompose(
            self.pencil, tol, cluster_tol=cluster_tol, seed=seed
        )
        return replace(self, wf=wf)


@dataclass(frozen=True)
class ConsistencyResult:
    """Outcome of projecting an initial state onto the solution manifold."""

    consistent: bool
    Z_p0: np.ndarray | None
    residual: float
    threshold: float

    def __bool__(self) -> bool:
        return self.consistent


@dataclass(frozen=True)
class SolvabilityReport:
    """Existence check for the fractional closed form."""

    solvable: bool
    eigenvalues: tuple[complex, ...]
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.solvable


@dataclass(frozen=True)
class Trajectory:
    """State and output sequences with solver provenance in ``meta``."""

    states: np.ndarray
    outputs: np.ndarray | None
    kind: str
    meta: dict[str, Any]

    def __post_init__(self):
        object.__setattr__(self, "states", _readonly(np.asarray(self.states)))
        if self.outputs is not None:
            object.__setattr__(self, "outputs", _readonly(np.asarray(self.outputs)))

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1


def _require_wf(sys: DescriptorSystem) -> WeierstrassForm:
    if sys.wf is None:
        raise StructuralError(
            "system has no attached decomposition; call with_weierstrass() first"
        )
    return sys.wf


def effective_inputs(sys: DescriptorSystem, input: InputSignal) -> np.ndarray:
    """Raw forcing sequence V_k, resolving the shaping matrix if present."""
    vals = input.values
    if vals.shape[1] != sys.input_dim:
        raise StructuralError(
            f"input width {vals.shape[1]} does not match the expected "
            f"{sys.input_dim}"
        )
    if sys.B is not None:
        return vals @ sys.B.T
    return np.array(vals)


def _padded(V: np.ndarray, needed_max: int, pad: bool) -> np.ndarray:
    have_max = V.shape[0] - 1
    if have_max >= needed_max:
        return V
    if not pad:
        raise HorizonError(
            f"input defined through index {have_max} but index "
            f"{needed_max} is required",
            required_index=needed_max,
        )
    extra = np.zeros((needed_max - have_max, V.shape[1]), dtype=V.dtype)
    return np.vstack([V, extra])


def _matrix_powers(A: np.ndarray, count: int) -> np.ndarray:
    """Stack [I, A, A^2, ...] with ``count`` entries."""
    d = A.shape[0]
    out = np.empty((count, d, d), dtype=A.dtype)
    if count == 0:
        return out
    out[0] = np.eye(d, dtype=A.dtype)
    for j in range(1, count):
        out[j] = out[j - 1] @ A
    return out


def _lower_block_standard(wf: WeierstrassForm, V: np.ndarray, K: int) -> np.ndarray:
    """Trailing-block forcing for k = 0..K; reads inputs up to K + q*-1."""
    q, qs = wf.q, wf.q_star
    if q == 0:
        return np.zeros((K + 1, 0))
    W2 = V @ wf.P_2.T
    low = np.zeros((K + 1, q), dtype=W2.dtype)
    Hp = np.eye(q, dtype=wf.H_q.dtype)
    for i in range(qs):
        low += W2[i : i + K + 1] @ Hp.T
        Hp = Hp @ wf.H_q
    return -low


def _lower_block_fractional(
    wf: WeierstrassForm, V: np.ndarray, n: float, K: int
) -> np.ndarray:
    """Trailing-block fractional forcing for k = 0..K; reads inputs <= k."""
    q, qs = wf.q, wf.q_star
    if q == 0:
        return np.zeros((K + 1, 0))
    W2 = (V @ wf.P_2.T)[: K + 1]
    low = np.zeros((K + 1, q), dtype=W2.dtype)
    Hp = np.eye(q, dtype=wf.H_q.dtype)
    for i in range(qs):
        term = fracops.rl_difference_sequence(W2, i * n)
        low += term @ Hp.T
        Hp = Hp @ wf.H_q
    return -low


def d_k_standard(
    wf: WeierstrassForm, input: InputSignal, k: int, *, pad: bool = False
) -> np.ndarray:
    """Stacked forcing vector of the standard solution at step ``k``.

    The leading block convolves past inputs with transition powers; the
    trailing block reads inputs at k .. k + q_star - 1 (empty sums are
    zero). Raises :class:`HorizonError` when the signal is too short,
    unless ``pad`` extends it with zeros.
    """
    k = int(k)
    if k < 0:
        raise StructuralError("k must be nonnegative")
    V = _padded(np.asarray(input.values, dtype=float), k + wf.q_star - 1, pad)
    if V.shape[1] != wf.m:
        raise StructuralError(f"inputs must have width {wf.m}")
    top = np.zeros(wf.p, dtype=wf.J_p.dtype)
    if wf.p > 0 and k > 0:
        W1 = V[:k] @ wf.P_1.T
        Jp = np.eye(wf.p, dtype=wf.J_p.dtype)
        for i in range(k - 1, -1, -1):
            top += Jp @ W1[i]
            Jp = Jp @ wf.J_p
    low = _lower_block_standard(wf, V[: k + wf.q_star], k)[k] if wf.q else np.zeros(0)
    return np.concatenate([top, low])


def d_k_fractional(
    wf: WeierstrassForm,
    input: InputSignal,
    n,
    k: int,
    ctrl: fracops.SeriesControl | None = None,
) -> np.ndarray:
    """Stacked fractional forcing vector at step ``k``.

    The leading block weights past inputs with Mittag-Leffler kernels;
    the trailing block applies the order-``i n`` backward differences to
    the shaped input history. Only inputs with indices <= k are read.
    """
    n = float(n)
    if not 0.0 < n <= 1.0:
        raise SolvabilityError(f"order must lie in (0, 1], got {n}")
    k = int(k)
    if k < 0:
        raise StructuralError("k must be nonnegative")
    ctrl = ctrl or fracops.SeriesControl()
    V = _padded(np.asarray(input.values, dtype=float), k, pad=False)
    if V.shape[1] != wf.m:
        raise StructuralError(f"inputs must have width {wf.m}")
    top = np.zeros(wf.p, dtype=wf.J_p.dtype)
    if wf.p > 0 and k > 0:
        W1 = V[: k + 1] @ wf.P_1.T
        for i in range(1, k + 1):
            kernel, _ = fracops.mittag_leffler(wf.J_p, k - i, n, ctrl)
            top += fracops.rising_factorial(k - i + 1, n - 1.0) * (kernel @ W1[i])
    low = _lower_block_fractional(wf, V, n, k)[k] if wf.q else np.zeros(0)
    return np.concatenate([top, low])


def check_consistency(
    sys: DescriptorSystem,
    Y0,
    input: InputSignal,
    tol: float = CONSISTENCY_TOL,
    *,
    order=None,
    ctrl: fracops.SeriesControl | None = None,
    pad: bool = False,
) -> ConsistencyResult:
    """Decide whether ``Y0`` lies on the solution manifold.

    Solves ``Y0 = Q_p z + Q D_0`` in least squares; the state is
    consistent iff the residual stays below ``tol * (1 + |Y0|)``. The
    minimizer is unique because Q_p has full column rank. Passing
    ``order`` uses the fractional forcing term for D_0 instead of the
    standard one.
    """
    wf = _require_wf(sys)
    Y0 = np.asarray(Y0, dtype=float).reshape(-1)
    if Y0.shape[0] != sys.m:
        raise StructuralError(f"Y0 must have length {sys.m}")
    V = effective_inputs(sys, input)
    if order is None:
        D0 = d_k_standard(wf, InputSignal(V), 0, pad=pad)
    else:
        D0 = d_k_fractional(wf, InputSignal(V), order, 0, ctrl)
    rhs = Y0 - wf.Q @ D0
    if wf.p > 0:
        Z, _, _, _ = np.linalg.lstsq(wf.Q_p, rhs, rcond=None)
        residual = float(np.linalg.norm(wf.Q_p @ Z - rhs))
    else:
        Z = np.zeros(0)
        residual = float(np.linalg.norm(rhs))
    threshold = tol * (1.0 + float(np.linalg.norm(Y0)))
    consistent = residual <= threshold
    return ConsistencyResult(
        consistent=consistent,
        Z_p0=Z if consistent else None,
        residual=residual,
        threshold=threshold,
    )


def project_consistent(
    sys: DescriptorSystem,
    Y0,
    input: InputSignal,
    *,
    order=None,
    ctrl: fracops.SeriesControl | None = None,
    pad: bool = False,
) -> tuple[np.ndarray, float]:
    """Nearest consistent initial state and the distance moved."""
    wf = _require_wf(sys)
    Y0 = np.asarray(Y0, dtype=float).reshape(-1)
    V = effective_inputs(sys, input)
    if order is None:
        D0 = d_k_standard(wf, InputSignal(V), 0, pad=pad)
    else:
        D0 = d_k_fractional(wf, InputSignal(V), order, 0, ctrl)
    rhs = Y0 - wf.Q @ D0
    if wf.p > 0:
        Z, _, _, _ = np.linalg.lstsq(wf.Q_p, rhs, rcond=None)
        projected = wf.Q_p @ Z + wf.Q @ D0
    else:
        projected = wf.Q @ D0
    projected = np.real_if_close(projected, tol=1000)
    return projected, float(np.linalg.norm(projected - Y0))


def general_solution_standard(
    wf: WeierstrassForm, D, input: InputSignal, k: int, *, pad: bool = False
) -> np.ndarray:
    """State of the general standard solution with free vector ``D``."""
    D = np.asarray(D).reshape(-1)
    if D.shape[0] != wf.p:
        raise StructuralError(f"free vector must have length {wf.p}")
    Dk = d_k_standard(wf, input, k, pad=pad)
    hom = np.linalg.matrix_power(wf.J_p, int(k)) @ D if wf.p else np.zeros(0)
    return wf.Q_p @ hom + wf.Q @ Dk


def _finalize_states(Y: np.ndarray, meta: dict) -> np.ndarray:
    if np.iscomplexobj(Y):
        imag_max = float(np.max(np.abs(Y.imag))) if Y.size else 0.0
        scale = 1.0 + (float(np.max(np.abs(Y))) if Y.size else 0.0)
        if imag_max <= 1e-8 * scale:
            meta["imag_discarded"] = imag_max
            return Y.real.copy()
        meta["complex_states"] = True
    return Y


def solve_standard(
    sys: DescriptorSystem,
    Y0,
    input: InputSignal,
    K: int,
    *,
    tol: float = CONSISTENCY_TOL,
    pad: bool = False,
) -> Trajectory:
    """Unique trajectory of the standard system through a consistent Y0.

    Requires the input defined through ``K + q_star - 1``. Attaches the
    consistency result and an equation-residual report to ``meta``.
    Raises :class:`InconsistentICError` when Y0 is off the manifold.
    """
    wf = _require_wf(sys)
    K = int(K)
    if K < 0:
        raise StructuralError("horizon must be nonnegative")
    V = effective_inputs(sys, input)
    V = _padded(V, K + wf.q_star - 1, pad)
    vsig = InputSignal(V)
    cons = check_consistency(sys, Y0, vsig, tol)
    if not cons.consistent:
        raise InconsistentICError(
            f"initial state is off the solution manifold "
            f"(residual {cons.residual:.3e} > {cons.threshold:.3e})",
            residual=cons.residual,
        )
    p, q = wf.p, wf.q
    Z0 = cons.Z_p0 if wf.p else np.zeros(0)

    Jpow = _matrix_powers(wf.J_p, K + 1) if p else np.zeros((K + 1, 0, 0))
    if p:
        hom = np.einsum("kij,j->ki", Jpow, Z0)
    else:
        hom = np.zeros((K + 1, 0))
    top = np.zeros((K + 1, p), dtype=hom.dtype)
    if p and K >= 1:
        W1 = V[:K] @ wf.P_1.T
        conv = _kernels.matrix_kernel_convolution(Jpow[:K], W1)
        top[1:] = conv
    low = _lower_block_standard(wf, V, K)

    Y = (hom + top) @ wf.Q_p.T + low @ wf.Q_q.T
    meta: dict[str, Any] = {
        "solver": "closed_form_standard",
        "q_star": wf.q_star,
        "consistency": cons,
    }
    Y = _finalize_states(Y, meta)
    X = Y @ sys.C.T

    traj = Trajectory(states=Y, outputs=X, kind="standard", meta=meta)
    from . import oracle  # deferred: oracle consumes trajectories

    bound = STANDARD_RESIDUAL_FACTOR * (1.0 + float(np.max(np.abs(V), initial=0.0)))
    meta["residual"] = oracle.residual_standard(sys.pencil, traj, vsig, bound=bound)
    return traj


def check_fractional_solvability(
    wf: WeierstrassForm, tol: float | None = None
) -> SolvabilityReport:
    """Existence gate for the fractional closed form.

    Solvable iff the finite eigenvalues are pairwise distinct (beyond
    the clustering tolerance) and all lie strictly inside the unit disk.
    """
    if wf.p == 0:
        return SolvabilityReport(solvable=True, eigenvalues=(), violations=())
    eigs = np.linalg.eigvals(wf.J_p)
    if tol is None:
        tol = DEFAULT_CLUSTER_REL * (1.0 + float(np.max(np.abs(eigs))))
    clusters = _cluster_points(eigs, tol)
    violations = []
    for rep, mult in clusters:
        if mult > 1:
            violations.append(
                f"repeated eigenvalue {rep:.6g} (multiplicity {mult})"
            )
        if abs(rep) >= 1.0:
            violations.append(
                f"eigenvalue {rep:.6g} outside the open unit disk "
                f"(|a| = {abs(rep):.6g})"
            )
    return SolvabilityReport(
        solvable=not violations,
        eigenvalues=tuple(rep for rep, _ in clusters),
        violations=tuple(violations),
    )


def solve_fractional(
    sys: DescriptorSystem,
    Y0,
    input: InputSignal,
    n,
    K: int,
    ctrl: fracops.SeriesControl | None = None,
    *,
    tol: float = CONSISTENCY_TOL,
) -> Trajectory:
    """Trajectory of the fractional system through a consistent Y0.

    Orders cover (0, 1]; the boundary value 1 reproduces the backward
    difference system exactly. Inputs are read only up to each step, so
    the horizon contract is simply ``k_max >= K``. The existence gate
    (distinct finite eigenvalues inside the unit disk) runs first.
    """
    wf = _require_wf(sys)
    n = float(n)
    if not 0.0 < n <= 1.0:
        raise SolvabilityError(f"order must lie in (0, 1], got {n}")
    K = int(K)
    if K < 0:
        raise StructuralError("horizon must be nonnegative")
    ctrl = ctrl or fracops.SeriesControl()
    gate = check_fractional_solvability(wf)
    if not gate.solvable:
        raise SolvabilityError(
            "fractional closed form does not exist: " + "; ".join(gate.violations)
        )
    V = effective_inputs(sys, input)
    V = _padded(V, K, pad=False)[: K + 1]
    vsig = InputSignal(V)
    cons = check_consistency(sys, Y0, vsig, tol, order=n, ctrl=ctrl)
    if not cons.consistent:
        raise InconsistentICError(
            f"initial state is off the solution manifold "
            f"(residual {cons.residual:.3e} > {cons.threshold:.3e})",
            residual=cons.residual,
        )
    p, q = wf.p, wf.q
    Z0 = cons.Z_p0 if p else np.zeros(0)

    ml_values = []
    terms_used = []
    if p:
        for j in range(K + 1):
            value, terms = fracops.mittag_leffler(wf.J_p, j, n, ctrl)
            ml_values.append(value)
            terms_used.append(terms)
    rf = [fracops.rising_factorial(j + 1, n - 1.0) for j in range(K + 1)]

    if p:
        shifted = (np.eye(p, dtype=wf.J_p.dtype) - wf.J_p) @ Z0
        hom = np.stack([rf[k] * (ml_values[k] @ shifted) for k in range(K + 1)])
    else:
        hom = np.zeros((K + 1, 0))
    top = np.zeros((K + 1, p), dtype=hom.dtype)
    if p and K >= 1:
        kernels = np.stack([rf[j] * ml_values[j] for j in range(K)])
        W1 = V[1 : K + 1] @ wf.P_1.T
        conv = _kernels.matrix_kernel_convolution(kernels, W1)
        top[1:] = conv
    low = _lower_block_fractional(wf, V, n, K)

    Y = (hom + top) @ wf.Q_p.T + low @ wf.Q_q.T
    meta: dict[str, Any] = {
        "solver": "closed_form_fractional",
        "order": n,
        "q_star": wf.q_star,
        "consistency": cons,
        "solvability": gate,
        "ml_terms_total": int(sum(terms_used)),
        "ml_terms_max": int(max(terms_used, default=0)),
    }
    Y = _finalize_states(Y, meta)
    X = Y @ sys.C.T

    traj = Trajectory(states=Y, outputs=X, kind="fractional", meta=meta)
    from . import oracle  # deferred: oracle consumes trajectories

    bound = FRACTIONAL_RESIDUAL_FACTOR * (1.0 + float(np.max(np.abs(V), initial=0.0)))
    meta["residual"] = oracle.residual_fractional(
        sys.pencil, traj, vsig, n, bound=bound
    )
    return traj

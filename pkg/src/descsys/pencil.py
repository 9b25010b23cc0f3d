"""Matrix pencils: regularity, finite spectrum, canonical decomposition.

A pencil is the one-parameter matrix family ``s*F - G`` for a pair of
square real matrices. Regular pencils (determinant not identically
zero) admit the Weierstrass canonical decomposition

    P F Q = diag(I_p, H_q),    P G Q = diag(J_p, I_q)

with ``J_p`` carrying the finite eigenvalue structure and ``H_q``
nilpotent of index ``q_star`` carrying the infinite part. The
decomposition here runs in three stages: a generalized Schur form with
finite eigenvalues reordered to the leading block, a coupled Sylvester
solve to cancel the off-diagonal coupling, and eigenvalue clustering
with generalized-eigenvector chain construction to bring both diagonal
blocks to canonical shape. The chain construction is the only fragile
step and sits behind its own residual check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    IllConditionedError,
    NotNilpotentError,
    RegularityError,
    StructuralError,
)

#: default relative tolerance for rank, regularity and residual decisions
DEFAULT_TOL = 1e-9

#: default clustering radius for eigenvalues, relative to their magnitude;
#: wide enough to absorb the numerical splitting of defective eigenvalues
DEFAULT_CLUSTER_REL = 1e-5

#: generalized eigenvalues of magnitude beyond this cutoff count as
#: infinite. An infinite eigenvalue inside a nilpotent chain of length s
#: is computed as a spurious finite one of magnitude around eps**(-1/s)
#: (1e5 and beyond for s <= 3), so a fixed magnitude cutoff separates the
#: two populations far more reliably than a tolerance on the raw QZ
#: denominators.
INFINITE_EIGENVALUE_CUTOFF = 1e4

#: relative rank threshold inside null-space filtrations
_RANK_RTOL = 1e-6

#: factor for the internal residual bound of the chain construction
_CHAIN_BOUND_FACTOR = 1e-6


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True, order="C")
    a.setflags(write=False)
    return a


def _as_matrix(M, name: str) -> np.ndarray:
    A = np.asarray(M)
    if A.ndim != 2:
        raise StructuralError(f"{name} must be a 2-D matrix, got ndim={A.ndim}")
    if A.dtype.kind not in "fc":
        A = A.astype(float)
    if not np.all(np.isfinite(A)):
        raise StructuralError(f"{name} contains non-finite entries")
    return A


@dataclass(frozen=True)
class Pencil:
    """Pair of square matrices (F, G) defining the family s*F - G.

    F is allowed (and expected) to be rank deficient; neither matrix is
    assumed invertible on its own. Instances are immutable.
    """

    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        F = _as_matrix(self.F, "F")
        G = _as_matrix(self.G, "G")
        if F.shape[0] != F.shape[1]:
            raise StructuralError(f"F must be square, got {F.shape}")
        if F.shape != G.shape:
            raise StructuralError(
                f"F and G must share one square dimension, got {F.shape} and {G.shape}"
            )
        object.__setattr__(self, "F", _readonly(F))
        object.__setattr__(self, "G", _readonly(G))

    @property
    def m(self) -> int:
        return self.F.shape[0]

    def norm_scale(self) -> float:
        """Frobenius scale ||F|| + ||G|| used by relative tolerances."""
        return float(np.linalg.norm(self.F) + np.linalg.norm(self.G))


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of the randomized determinant probe for regularity."""

    regular: bool
    witness: complex | None
    probes: tuple[tuple[complex, float, float], ...]
    seed: int
    confirmed_singular: bool | None = None

    def __bool__(self) -> bool:
        return self.regular


@dataclass(frozen=True)
class FiniteSpectrum:
    """Finite generalized eigenvalues with multiplicities."""

    eigenvalues: tuple[tuple[complex, int], ...]

    @property
    def nu(self) -> int:
        return len(self.eigenvalues)

    @property
    def p(self) -> int:
        return sum(mult for _, mult in self.eigenvalues)


@dataclass(frozen=True)
class WeierstrassForm:
    """Canonical decomposition of a regular pencil.

    ``P @ F @ Q`` equals ``diag(I_p, H_q)`` and ``P @ G @ Q`` equals
    ``diag(J_p, I_q)`` up to the reported residual. ``q_star`` is the
    nilpotency index of ``H_q`` (1 when ``q`` is 0). Condition numbers
    of the transformations and the reconstruction residual with its
    bound are carried as diagnostics.
    """

    P: np.ndarray
    Q: np.ndarray
    J_p: np.ndarray
    H_q: np.ndarray
    p: int
    q: int
    q_star: int
    cond_P: float = math.nan
    cond_Q: float = math.nan
    residual: float = math.nan
    residual_bound: float = math.nan
    complex_eigenvalues: bool = False
    finite_clusters: tuple[tuple[complex, int], ...] | None = None
    nilpotent_blocks: tuple[int, ...] | None = None

    def __post_init__(self):
        for name in ("P", "Q", "J_p", "H_q"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name))))
        m = self.p + self.q
        if self.P.shape != (m, m) or self.Q.shape != (m, m):
            raise StructuralError("P and Q must be m-by-m with m = p + q")
        if self.J_p.shape != (self.p, self.p):
            raise StructuralError(f"J_p must be {self.p}-by-{self.p}")
        if self.H_q.shape != (self.q, self.q):
            raise StructuralError(f"H_q must be {self.q}-by-{self.q}")
        if self.q_star < 1:
            raise StructuralError("q_star is at least 1 by convention")

    @property
    def m(self) -> int:
        return self.p + self.q

    @property
    def Q_p(self) -> np.ndarray:
        return self.Q[:, : self.p]

    @property
    def Q_q(self) -> np.ndarray:
        return self.Q[:, self.p :]

    @property
    def P_1(self) -> np.ndarray:
        return self.P[: self.p, :]

    @property
    def P_2(self) -> np.ndarray:
        return self.P[self.p :, :]

    def canonical_F(self) -> np.ndarray:
        D = np.zeros((self.m, self.m), dtype=self.H_q.dtype)
        D[: self.p, : self.p] = np.eye(self.p)
        D[self.p :, self.p :] = self.H_q
        return D

    def canonical_G(self) -> np.ndarray:
        D = np.zeros((self.m, self.m), dtype=self.J_p.dtype)
        D[: self.p, : self.p] = self.J_p
        D[self.p :, self.p :] = np.eye(self.q)
        return D


def partitions(wf: WeierstrassForm):
    """Block slices (Q_p, Q_q, P_1, P_2) of the transformation matrices."""
    return wf.Q_p, wf.Q_q, wf.P_1, wf.P_2


def is_regular(pencil: Pencil, tol: float = DEFAULT_TOL, seed: int = 0) -> RegularityReport:
    """Decide regularity by evaluating det(s*F - G) at randomized probes.

    Uses ``m + 1`` seeded probe points; the pencil is regular iff at
    least one determinant exceeds ``tol`` times the probe scale
    ``(|s| ||F|| + ||G||)**m``. When every probe fails, a generalized
    eigenvalue computation confirms (or disputes) the singular verdict;
    the result is recorded in the report either way.
    """
    if tol <= 0:
        raise StructuralError("tolerance must be positive")
    m = pencil.m
    F, G = pencil.F, pencil.G
    norm_f = float(np.linalg.norm(F))
    norm_g = float(np.linalg.norm(G))
    rng = np.random.default_rng(seed)
    radius_scale = (1.0 + norm_g) / (1.0 + norm_f)
    radii = rng.uniform(0.5, 1.5, m + 1) * radius_scale
    angles = rng.uniform(0.0, 2.0 * math.pi, m + 1)
    points = radii * np.exp(1j * angles)

    probes = []
    witness = None
    log_tol = math.log(tol)
    for s in points:
        sign, logdet = np.linalg.slogdet(s * F - G)
        scale = abs(s) * norm_f + norm_g
        log_threshold = log_tol + m * math.log(scale) if scale > 0 else -math.inf
        passed = sign != 0 and logdet > log_threshold
        probes.append((complex(s), float(logdet), float(log_threshold)))
        if passed and witness is None:
            witness = complex(s)

    regular = witness is not None
    confirmed = None
    if not regular:
        # a singular pencil shows up as an indeterminate alpha/beta pair
        alpha, beta = scipy.linalg.eig(G, F, homogeneous_eigvals=True)
        tiny_a = np.abs(alpha) <= math.sqrt(np.finfo(float).eps) * (1.0 + norm_g)
        tiny_b = np.abs(beta) <= math.sqrt(np.finfo(float).eps) * (1.0 + norm_f)
        confirmed = bool(np.any(tiny_a & tiny_b))
    return RegularityReport(
        regular=regular,
        witness=witness,
        probes=tuple(probes),
        seed=seed,
        confirmed_singular=confirmed,
    )


def _require_regular(pencil: Pencil, tol: float, seed: int) -> None:
    report = is_regular(pencil, tol=tol, seed=seed)
    if not report.regular:
        raise RegularityError(
            "pencil is singular: all determinant probes vanished "
            f"(confirmed={report.confirmed_singular})",
            report=report,
        )


def _qz_split(pencil: Pencil, infinite_cutoff: float):
    """Generalized Schur form of (G, F) with finite eigenvalues leading.

    Returns (S, T, alpha, beta, Qz, Zz, p) where S = Qz^H G Zz,
    T = Qz^H F Zz and the leading p-by-p block of T is the finite part.
    An eigenvalue counts as finite when |alpha| < cutoff * |beta|.
    """
    F, G = pencil.F, pencil.G

    def select(alpha, beta):
        return np.abs(beta) * infinite_cutoff > np.abs(alpha)

    S, T, alpha, beta, Qz, Zz = scipy.linalg.ordqz(G, F, sort=select, output="real")
    finite_mask = np.abs(beta) * infinite_cutoff > np.abs(alpha)
    p = int(np.sum(finite_mask))
    if not (np.all(finite_mask[:p]) and not np.any(finite_mask[p:])):
        raise IllConditionedError(
            "could not separate finite from infinite eigenvalues; "
            "adjust the cutoff or rescale the pencil"
        )
    return S, T, alpha, beta, Qz, Zz, p


def _cluster_points(points: np.ndarray, tol: float):
    """Greedy clustering of complex points; returns [(mean, count)] sorted.

    Cluster means with imaginary part below ``tol`` are snapped to the
    real axis, which also fixes the realness decision downstream.
    """
    pts = np.asarray(points, dtype=complex)
    order = np.lexsort((pts.imag, pts.real))
    means: list[complex] = []
    counts: list[int] = []
    for idx in order:
        z = pts[idx]
        placed = False
        for i, mu in enumerate(means):
            if abs(z - mu) <= tol:
                counts[i] += 1
                means[i] = mu + (z - mu) / counts[i]
                placed = True
                break
        if not placed:
            means.append(z)
            counts.append(1)
    reps = [mu.real if abs(mu.imag) <= tol else mu for mu in means]
    clusters = sorted(
        zip(reps, counts), key=lambda item: (np.real(item[0]), np.imag(item[0]))
    )
    return [(complex(rep), int(cnt)) for rep, cnt in clusters]


def finite_spectrum(
    pencil: Pencil,
    tol: float | None = None,
    *,
    regularity_tol: float = DEFAULT_TOL,
    infinite_cutoff: float = INFINITE_EIGENVALUE_CUTOFF,
    seed: int = 0,
) -> FiniteSpectrum:
    """All finite generalized eigenvalues of a regular pencil.

    ``tol`` is the clustering radius: eigenvalues closer than ``tol``
    are merged into one entry whose multiplicity counts the members.
    The default scales with the eigenvalue magnitudes, wide enough to
    re-merge the numerical splitting of repeated eigenvalues.
    """
    _require_regular(pencil, regularity_tol, seed)
    _, _, alpha, beta, _, _, p = _qz_split(pencil, infinite_cutoff)
    if p == 0:
        return FiniteSpectrum(eigenvalues=())
    lam = alpha[:p] / beta[:p]
    if tol is None:
        tol = DEFAULT_CLUSTER_REL * (1.0 + float(np.max(np.abs(lam))))
    clusters = _cluster_points(lam, tol)
    return FiniteSpectrum(eigenvalues=tuple(clusters))


def _orthonormal_nullspace(A: np.ndarray, threshold: float) -> np.ndarray:
    """Orthonormal null-space basis with an absolute singular-value cut.

    The caller supplies the threshold because the natural scale of a
    matrix power is the powered norm of its base, not the largest
    singular value of the power itself (which is pure roundoff once the
    power annihilates everything).
    """
    _, s, Vh = np.linalg.svd(A)
    rank = int(np.sum(s > threshold))
    return Vh[rank:].conj().T


def _orthonormal_columns(cols: np.ndarray, rtol: float) -> np.ndarray:
    if cols.shape[1] == 0:
        return cols
    Qm, R = np.linalg.qr(cols)
    d = np.abs(np.diag(R))
    keep = d > rtol * max(float(d.max()), 1e-300)
    return Qm[:, keep]


def _jordan_chains(
    A: np.ndarray, eig: complex, mult: int, rtol: float, dust_floor: float
):
    """Generalized eigenvector chains of ``A`` at one clustered eigenvalue.

    Returns (V, sizes) where V stacks the chain vectors column-wise,
    eigenvector first within each chain and longest chains first, so
    that ``A @ V = V @ Jb`` for the canonical block ``Jb`` built from
    ``eig`` and ``sizes``. Chains are scaled by a single factor each,
    keeping the unit superdiagonal exact.

    Rank decisions at power ``j`` cut singular values below
    ``rtol * |B|**j`` or below the propagated dust level
    ``dust_floor * max(|B|, 1)**(j-1)``, whichever is larger. The second
    term matters when ``B`` itself is pure eigenvalue dust (a simple
    eigenvalue, or a zero nilpotent part), where any norm-relative rule
    would mistake roundoff for structure.
    """
    n = A.shape[0]
    B = A - eig * np.eye(n, dtype=A.dtype)
    norm_B = float(np.linalg.norm(B, 2))
    bases: list[np.ndarray] = []
    dims = [0]
    Bpow = np.eye(n, dtype=A.dtype)
    for j in range(1, n + 1):
        Bpow = Bpow @ B
        threshold = max(
            rtol * norm_B**j, dust_floor * max(norm_B, 1.0) ** (j - 1), 1e-300
        )
        ns = _orthonormal_nullspace(Bpow, threshold)
        bases.append(ns)
        dims.append(ns.shape[1])
        if dims[-1] >= mult:
            break
    if dims[-1] != mult:
        raise IllConditionedError(
            f"null-space filtration at eigenvalue {eig} reached dimension "
            f"{dims[-1]} instead of the clustered multiplicity {mult}"
        )
    depth = len(bases)
    ranks = [dims[j + 1] - dims[j] for j in range(depth)]  # blocks of size > j
    if any(ranks[j] < ranks[j + 1] for j in range(depth - 1)):
        raise IllConditionedError(
            f"inconsistent rank sequence at eigenvalue {eig}: {ranks}"
        )

    chains: list[list[np.ndarray]] = []
    frontier: list[np.ndarray] = []
    for j in range(depth, 0, -1):
        frontier = [B @ v for v in frontier]
        need = ranks[j - 1] - (ranks[j] if j < depth else 0)
        if need == 0:
            continue
        lower = bases[j - 2] if j >= 2 else np.zeros((n, 0), dtype=A.dtype)
        avoid_cols = [lower] + [v[:, None] for v in frontier]
        avoid = _orthonormal_columns(np.hstack(avoid_cols), rtol)
        cand = bases[j - 1]
        resid = cand - avoid @ (avoid.conj().T @ cand)
        U, sv, _ = np.linalg.svd(resid, full_matrices=False)
        if sv.size < need or sv[need - 1] <= rtol:
            raise IllConditionedError(
                f"could not extract {need} chain tops of length {j} "
                f"at eigenvalue {eig} (singular values {sv[:need]})"
            )
        for c in range(need):
            top = U[:, c]
            chain = [top]
            for _ in range(j - 1):
                chain.append(B @ chain[-1])
            chain.reverse()  # eigenvector first
            scale = max(np.linalg.norm(v) for v in chain)
            chain = [v / scale for v in chain]
            chains.append(chain)
            frontier.append(top / scale)

    chains.sort(key=len, reverse=True)
    V = np.hstack([np.column_stack(chain) for chain in chains])
    sizes = [len(chain) for chain in chains]
    return V, sizes


def _canonical_jordan(clusters, sizes_per_cluster, dim: int, dtype) -> np.ndarray:
    """Exact canonical matrix from cluster values and chain sizes."""
    J = np.zeros((dim, dim), dtype=dtype)
    pos = 0
    for (rep, _), sizes in zip(clusters, sizes_per_cluster):
        value = rep if np.dtype(dtype).kind == "c" else complex(rep).real
        for size in sizes:
            for i in range(size):
                J[pos + i, pos + i] = value
                if i + 1 < size:
                    J[pos + i, pos + i + 1] = 1.0
            pos += size
    return J


def _block_to_canonical(
    A: np.ndarray,
    clusters,
    rtol: float,
    bound_factor: float = _CHAIN_BOUND_FACTOR,
    dust_floor: float | None = None,
):
    """Chain basis V and exact canonical J with A V = V J, per cluster."""
    n = A.shape[0]
    if dust_floor is None:
        dust_floor = 1e3 * np.finfo(float).eps * max(1.0, float(np.linalg.norm(A)))
    use_complex = any(np.iscomplex(rep) for rep, _ in clusters)
    work = A.astype(complex) if use_complex else A.astype(float)
    V_parts = []
    sizes_per_cluster = []
    for rep, mult in clusters:
        rep_val = rep if use_complex else rep.real
        Vc, sizes = _jordan_chains(work, rep_val, mult, rtol, dust_floor)
        V_parts.append(Vc)
        sizes_per_cluster.append(sizes)
    V = np.hstack(V_parts)
    dtype = complex if use_complex else float
    J = _canonical_jordan(clusters, sizes_per_cluster, n, dtype)
    resid = float(np.linalg.norm(work @ V - V @ J))
    cond_V = float(np.linalg.cond(V))
    bound = bound_factor * max(1.0, float(np.linalg.norm(work))) * max(1.0, cond_V)
    if not np.isfinite(cond_V) or resid > bound:
        raise IllConditionedError(
            f"chain construction residual {resid:.3e} exceeds its bound "
            f"{bound:.3e} (cond of basis {cond_V:.3e})",
            residual=resid,
        )
    return V, J, sizes_per_cluster, use_complex


def _polish_transformations(F, G, P, Q, DF, DG, max_iters: int = 3):
    """Newton least-squares refinement of the transformation pair.

    The structure detection tolerates eigenvalue dust that the QZ phase
    introduces around defective blocks, but the transformations it
    yields inherit that dust. With the canonical targets fixed, a few
    Gauss-Newton steps on ``P F Q = DF, P G Q = DG`` recover the
    transformation accuracy the data supports (the gauge freedom of the
    canonical form is handled by taking minimum-norm steps).
    """
    m = F.shape[0]
    if m == 0:
        return P, Q

    def residuals(Pc, Qc):
        return Pc @ F @ Qc - DF, Pc @ G @ Qc - DG

    def size(RF, RG):
        return max(float(np.linalg.norm(RF)), float(np.linalg.norm(RG)))

    eye = np.eye(m)
    RF, RG = residuals(P, Q)
    best = size(RF, RG)
    floor = 100.0 * np.finfo(float).eps * (
        np.linalg.norm(F) + np.linalg.norm(G)
    ) * max(1.0, float(np.linalg.norm(P)) * float(np.linalg.norm(Q)))
    for _ in range(max_iters):
        if best <= floor:
            break
        top = np.hstack([np.kron((F @ Q).T, eye), np.kron(eye, P @ F)])
        bot = np.hstack([np.kron((G @ Q).T, eye), np.kron(eye, P @ G)])
        M = np.vstack([top, bot])
        rhs = -np.concatenate([RF.flatten(order="F"), RG.flatten(order="F")])
        step, _, _, _ = np.linalg.lstsq(M, rhs, rcond=None)
        dP = step[: m * m].reshape((m, m), order="F")
        dQ = step[m * m :].reshape((m, m), order="F")
        P_new, Q_new = P + dP, Q + dQ
        RF_new, RG_new = residuals(P_new, Q_new)
        new = size(RF_new, RG_new)
        if new >= best:
            break
        P, Q, best = P_new, Q_new, new
        RF, RG = RF_new, RG_new
    return P, Q


def _solve_coupling(T11, T12, T22, S11, S12, S22):
    """Kronecker solve of T11 R + L T22 = -T12, S11 R + L S22 = -S12.

    The unknown blocks R and L turn the ordered Schur form into block-
    diagonal shape. The system is nonsingular exactly because the
    leading block carries only finite and the trailing block only
    infinite eigenvalues.
    """
    p, q = T12.shape
    Ip = np.eye(p)
    Iq = np.eye(q)
    top = np.hstack([np.kron(Iq, T11), np.kron(T22.T, Ip)])
    bot = np.hstack([np.kron(Iq, S11), np.kron(S22.T, Ip)])
    M = np.vstack([top, bot])
    rhs = -np.concatenate([T12.flatten(order="F"), S12.flatten(order="F")])
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(
            "coupled Sylvester system is singular; finite and infinite "
            "spectra are not separated"
        ) from exc
    R = sol[: p * q].reshape((p, q), order="F")
    L = sol[p * q :].reshape((p, q), order="F")
    return R, L


def nilpotency_index(H: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    """Smallest power at which H vanishes, within a scaled tolerance.

    Empty matrices have index 1 by convention. Raises
    :class:`NotNilpotentError` when no power up to the dimension
    annihilates H.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise StructuralError("H must be square")
    q = H.shape[0]
    if q == 0:
        return 1
    norm_h = float(np.linalg.norm(H))
    power = np.array(H, dtype=H.dtype if H.dtype.kind in "fc" else float)
    for i in range(1, q + 1):
        if np.linalg.norm(power) <= tol * max(1.0, norm_h) ** i:
            return i
        power = power @ H
    raise NotNilpotentError(
        f"no power up to {q} annihilates the matrix (|H^{q}| = "
        f"{np.linalg.norm(power):.3e})"
    )


def _cond(A: np.ndarray) -> float:
    if A.size == 0:
        return 1.0
    return float(np.linalg.cond(A))


def _reconstruction_residual(pencil: Pencil, wf: WeierstrassForm) -> float:
    P, Q = wf.P, wf.Q
    rF = np.linalg.norm(P @ pencil.F @ Q - wf.canonical_F())
    rG = np.linalg.norm(P @ pencil.G @ Q - wf.canonical_G())
    return float(max(rF, rG))


def weierstrass_decompose(
    pencil: Pencil,
    tol: float = DEFAULT_TOL,
    *,
    cluster_tol: float | None = None,
    infinite_cutoff: float = INFINITE_EIGENVALUE_CUTOFF,
    seed: int = 0,
) -> WeierstrassForm:
    """Canonical decomposition of a regular pencil.

    Parameters
    ----------
    pencil:
        The pair (F, G); must be regular.
    tol:
        Relative tolerance for the regularity check and the
        reconstruction bound.
    cluster_tol:
        Clustering radius for finite eigenvalues; defaults to a scale-
        aware value wide enough to absorb defective-eigenvalue splitting.
    infinite_cutoff:
        Eigenvalue magnitude beyond which the infinite part begins.
    seed:
        Seed for the randomized regularity probes.

    Raises
    ------
    RegularityError
        If the pencil is singular.
    IllConditionedError
        If the chain construction or the final reconstruction fails its
        residual bound.
    """
    _require_regular(pencil, tol, seed)
    m = pencil.m
    S, T, alpha, beta, Qz, Zz, p = _qz_split(pencil, infinite_cutoff)
    q = m - p

    T11, T12, T22 = T[:p, :p], T[:p, p:], T[p:, p:]
    S11, S12, S22 = S[:p, :p], S[:p, p:], S[p:, p:]

    if p > 0 and q > 0:
        R, L = _solve_coupling(T11, T12, T22, S11, S12, S22)
    else:
        R = np.zeros((p, q))
        L = np.zeros((p, q))

    complex_form = False
    finite_clusters: tuple = ()
    if p > 0:
        A_f = np.linalg.solve(T11, S11)
        lam = alpha[:p] / beta[:p]
        if cluster_tol is None:
            cluster_tol = DEFAULT_CLUSTER_REL * (1.0 + float(np.max(np.abs(lam))))
        clusters = _cluster_points(lam, cluster_tol)
        V, J, _, complex_form = _block_to_canonical(A_f, clusters, _RANK_RTOL)
        P_fin = np.linalg.inv(T11 @ V)
        finite_clusters = tuple(clusters)
    else:
        V = np.zeros((0, 0))
        J = np.zeros((0, 0))
        P_fin = np.zeros((0, 0))

    nilpotent_blocks: tuple = ()
    if q > 0:
        N = np.linalg.solve(S22, T22)
        # eigenvalue dust in N reaches 1/cutoff by construction of the
        # split, so the rank decisions must sit above that level
        nilp_rtol = max(_RANK_RTOL, 10.0 / infinite_cutoff)
        nilp_bound = max(_CHAIN_BOUND_FACTOR, 100.0 / infinite_cutoff)
        nilp_floor = (10.0 / infinite_cutoff) * max(1.0, float(np.linalg.norm(N)))
        W, H, sizes_per_cluster, _ = _block_to_canonical(
            N, [(0.0 + 0.0j, q)], nilp_rtol, nilp_bound, dust_floor=nilp_floor
        )
        H = H.real
        W = W.real if not complex_form else W.astype(complex)
        P_inf = np.linalg.inv(S22 @ W)
        nilpotent_blocks = tuple(sizes_per_cluster[0])
        q_star = max(nilpotent_blocks)
    else:
        W = np.zeros((0, 0))
        H = np.zeros((0, 0))
        P_inf = np.zeros((0, 0))
        q_star = 1

    dtype = complex if complex_form else float
    M_L = np.eye(m, dtype=dtype)
    M_L[:p, p:] = L
    M_R = np.eye(m, dtype=dtype)
    M_R[:p, p:] = R
    block_P = np.zeros((m, m), dtype=dtype)
    block_P[:p, :p] = P_fin
    block_P[p:, p:] = P_inf
    block_Q = np.zeros((m, m), dtype=dtype)
    block_Q[:p, :p] = V
    block_Q[p:, p:] = W

    P_total = block_P @ M_L @ Qz.conj().T
    Q_total = Zz @ M_R @ block_Q
    if not complex_form:
        P_total = P_total.real
        Q_total = Q_total.real

    DF = np.zeros((m, m), dtype=dtype)
    DF[:p, :p] = np.eye(p)
    DF[p:, p:] = H
    DG = np.zeros((m, m), dtype=dtype)
    DG[:p, :p] = J
    DG[p:, p:] = np.eye(q)
    P_total, Q_total = _polish_transformations(
        pencil.F, pencil.G, P_total, Q_total, DF, DG
    )

    wf = WeierstrassForm(
        P=P_total,
        Q=Q_total,
        J_p=J,
        H_q=H,
        p=p,
        q=q,
        q_star=q_star,
        cond_P=_cond(P_total),
        cond_Q=_cond(Q_total),
        complex_eigenvalues=complex_form,
        finite_clusters=finite_clusters,
        nilpotent_blocks=nilpotent_blocks,
    )
    residual = _reconstruction_residual(pencil, wf)
    bound = tol * pencil.norm_scale() * wf.cond_P * wf.cond_Q
    if residual > bound:
        raise IllConditionedError(
            f"reconstruction residual {residual:.3e} exceeds its bound {bound:.3e}",
            residual=residual,
        )
    return WeierstrassForm(
        P=wf.P,
        Q=wf.Q,
        J_p=wf.J_p,
        H_q=wf.H_q,
        p=p,
        q=q,
        q_star=q_star,
        cond_P=wf.cond_P,
        cond_Q=wf.cond_Q,
        residual=residual,
        residual_bound=bound,
        complex_eigenvalues=complex_form,
        finite_clusters=finite_clusters,
        nilpotent_blocks=nilpotent_blocks,
    )


def validate_weierstrass(
    pencil: Pencil, wf: WeierstrassForm, tol: float = DEFAULT_TOL
) -> WeierstrassForm:
    """Check an externally supplied decomposition against its invariants.

    Verifies shapes, p + q = m, invertibility of P and Q, the nilpotency
    index of H_q, and the reconstruction residual against the scaled
    bound. Returns a copy carrying the computed diagnostics. This lets
    exact hand-built canonical forms bypass the numerical decomposition.
    """
    if wf.m != pencil.m:
        raise StructuralError(
            f"decomposition dimension {wf.m} does not match pencil {pencil.m}"
        )
    cond_P = _cond(wf.P)
    cond_Q = _cond(wf.Q)
    if not (np.isfinite(cond_P) and np.isfinite(cond_Q)):
        raise IllConditionedError("P or Q is numerically singular")
    idx = nilpotency_index(wf.H_q, tol)
    if idx != wf.q_star:
        raise NotNilpotentError(
            f"declared nilpotency index {wf.q_star} but computed {idx}"
        )
    probe = WeierstrassForm(
        P=wf.P,
        Q=wf.Q,
        J_p=wf.J_p,
        H_q=wf.H_q,
        p=wf.p,
        q=wf.q,
        q_star=wf.q_star,
    )
    residual = _reconstruction_residual(pencil, probe)
    bound = tol * max(pencil.norm_scale(), 1.0) * cond_P * cond_Q
    if residual > bound:
        raise IllConditionedError(
            f"supplied decomposition residual {residual:.3e} exceeds "
            f"bound {bound:.3e}",
            residual=residual,
        )
    complex_form = bool(
        np.iscomplexobj(wf.P)
        and np.max(np.abs(np.asarray(wf.P).imag)) > 0
    )
    return WeierstrassForm(
        P=wf.P,
        Q=wf.Q,
        J_p=wf.J_p,
        H_q=wf.H_q,
        p=wf.p,
        q=wf.q,
        q_star=wf.q_star,
        cond_P=cond_P,
        cond_Q=cond_Q,
        residual=residual,
        residual_bound=bound,
        complex_eigenvalues=complex_form,
        finite_clusters=wf.finite_clusters,
        nilpotent_blocks=wf.nilpotent_blocks,
    )

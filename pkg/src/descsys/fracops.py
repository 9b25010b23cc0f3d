"""Discrete fractional primitives on the unit-step backward grid.

Provides the rising factorial, nabla fractional sums and differences of
Riemann-Liouville type, and the two-parameter discrete Mittag-Leffler
matrix function. Positive-order differences are built by composition:
a fractional sum of the complementary order followed by integer
backward differences, with empty history before the base index. Under
that convention the operators compose exactly like powers of (1 - x)
acting on generating functions, which is what makes the closed-form
solvers verifiable by residual substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, gammasgn

from . import _kernels
from .errors import ConvergenceError, DomainError, SolvabilityError, StructuralError

#: snap nearly-integer orders produced by repeated addition of a float order
_INTEGER_SNAP = 1e-12


@dataclass(frozen=True)
class FracOrder:
    """Fractional order restricted to the open interval (0, 1)."""

    n: float

    def __post_init__(self):
        n = float(self.n)
        if not 0.0 < n < 1.0:
            raise DomainError(f"fractional order must lie in (0, 1), got {self.n}")
        object.__setattr__(self, "n", n)

    def __float__(self) -> float:
        return self.n


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for infinite series evaluations."""

    tol: float = 1e-12
    max_terms: int = 10000

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("series tolerance must be positive")
        if int(self.max_terms) < 1:
            raise DomainError("max_terms must be at least 1")
        object.__setattr__(self, "max_terms", int(self.max_terms))


def rising_factorial(k: float, alpha: float) -> float:
    """Rising power ``Gamma(k + alpha) / Gamma(k)``.

    Computed through log-gamma with explicit sign tracking so that large
    arguments do not overflow. Requires ``k >= 1``; raises
    :class:`DomainError` when ``k + alpha`` hits a pole of the gamma
    function (a non-positive integer).
    """
    k = float(k)
    alpha = float(alpha)
    if k < 1.0:
        raise DomainError(f"rising_factorial requires k >= 1, got {k}")
    x = k + alpha
    if x <= 0.0 and abs(x - round(x)) < _INTEGER_SNAP:
        raise DomainError(f"gamma pole at k + alpha = {x}")
    return float(gammasgn(x) * np.exp(gammaln(x) - gammaln(k)))


def _rising_ratio(x: float, a: float) -> float:
    """Unchecked ``Gamma(x + a)/Gamma(x)`` for positive ``x`` and ``x + a``."""
    return math.exp(math.lgamma(x + a) - math.lgamma(x))


def sum_weights(n: float, count: int) -> np.ndarray:
    """Kernel weights of the order-``n`` nabla fractional sum.

    Entry ``t`` is ``(t + 1)`` raised to ``n - 1`` divided by
    ``Gamma(n)``, i.e. ``Gamma(t + n) / (Gamma(t + 1) Gamma(n))``. These
    are the series coefficients of ``(1 - x)**(-n)`` and are positive
    for every ``n > 0``.
    """
    if n <= 0:
        raise DomainError(f"sum order must be positive, got {n}")
    t = np.arange(count, dtype=float)
    return np.exp(gammaln(t + n) - gammaln(t + 1.0) - gammaln(n))


def _as_sequence(Y) -> tuple[np.ndarray, bool]:
    arr = np.asarray(Y)
    if arr.dtype.kind not in "fc":
        arr = arr.astype(float)
    if arr.ndim == 1:
        return arr[:, None], True
    if arr.ndim == 2:
        return arr, False
    raise StructuralError("sequence must be 1-D (scalars) or 2-D (vectors)")


def nabla_fractional_sum(Y, n: float, k: int, alpha: int = 0):
    """Order-``n`` nabla fractional sum of ``Y`` at index ``k``.

    ``Y`` holds the samples for indices ``alpha .. alpha + len(Y) - 1``;
    the result is the weighted history sum from ``alpha`` through ``k``.
    At ``n = 1`` this reduces to the plain cumulative sum.
    """
    n = float(n)
    if n <= 0:
        raise DomainError(f"sum order must be positive, got {n}")
    seq, scalar = _as_sequence(Y)
    offset = int(k) - int(alpha)
    if not 0 <= offset < seq.shape[0]:
        raise StructuralError(
            f"index {k} outside the supplied range "
            f"[{alpha}, {alpha + seq.shape[0] - 1}]"
        )
    w = sum_weights(n, offset + 1)
    value = w[::-1] @ seq[: offset + 1]
    return value[0] if scalar else value


def nabla_fractional_sum_sequence(Y, n: float):
    """Order-``n`` nabla fractional sum evaluated at every index at once."""
    n = float(n)
    if n <= 0:
        raise DomainError(f"sum order must be positive, got {n}")
    seq, scalar = _as_sequence(Y)
    w = sum_weights(n, seq.shape[0])
    out = _kernels.weighted_history_sums(w, seq)
    return out[:, 0] if scalar else out


def nabla_fractional_difference(Y, n, k: int):
    """Riemann-Liouville backward fractional difference at index ``k``.

    Composition of the order-``(1 - n)`` fractional sum with one
    backward difference. ``k`` must be at least 1 because the backward
    difference needs a predecessor; orders cover ``(0, 1]`` with ``n = 1``
    collapsing to the plain backward difference.
    """
    n = float(n)
    if not 0.0 < n <= 1.0:
        raise DomainError(f"difference order must lie in (0, 1], got {n}")
    k = int(k)
    if k < 1:
        raise DomainError("backward difference needs a predecessor (k >= 1)")
    seq, scalar = _as_sequence(Y)
    if k >= seq.shape[0]:
        raise StructuralError(f"index {k} beyond the supplied sequence")
    if n == 1.0:
        value = seq[k] - seq[k - 1]
    else:
        w = sum_weights(1.0 - n, k + 1)
        z_k = w[: k + 1][::-1] @ seq[: k + 1]
        z_prev = w[:k][::-1] @ seq[:k]
        value = z_k - z_prev
    return value[0] if scalar else value


def rl_difference_sequence(Y, nu: float):
    """Order-``nu`` Riemann-Liouville difference applied to a whole sequence.

    For ``nu >= 0``: fractional sum of order ``ceil(nu) - nu`` followed by
    ``ceil(nu)`` backward differences, using empty history before index 0
    (the first sample is its own difference). Order 0 is the identity.
    """
    nu = float(nu)
    if nu < 0:
        raise DomainError("use the fractional sum for negative orders")
    if abs(nu - round(nu)) < _INTEGER_SNAP:
        nu = float(round(nu))
    seq, scalar = _as_sequence(Y)
    if nu == 0.0:
        out = seq.copy()
    else:
        whole = math.ceil(nu)
        frac = whole - nu
        if frac > 0.0:
            w = sum_weights(frac, seq.shape[0])
            out = _kernels.weighted_history_sums(w, seq)
        else:
            out = seq.copy()
        for _ in range(whole):
            nxt = out.copy()
            nxt[1:] -= out[:-1]
            out = nxt
    return out[:, 0] if scalar else out


def spectral_radius(J: np.ndarray) -> float:
    J = np.asarray(J)
    if J.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(J))))


#: relative accuracy the series evaluation guarantees before escalating
#: to the high-precision path (cancellation of alternating terms can
#: exceed what float64 supports for spectra near the negative unit disk)
_ML_ACCURACY_FLOOR = 1e-9


def mittag_leffler(
    J: np.ndarray,
    k: int,
    n,
    ctrl: SeriesControl | None = None,
) -> tuple[np.ndarray, int]:
    """Two-parameter discrete Mittag-Leffler matrix function.

    Evaluates ``sum_i J**i * r(i) / Gamma((i + 1) n)`` where ``r(i)`` is
    ``(k + n)`` raised to the rising power ``i n``. Requires the spectral
    radius of ``J`` below 1 (otherwise the series diverges and a
    :class:`SolvabilityError` is raised) and ``k + n >= 0``.

    Returns the matrix value together with the number of series terms
    accumulated. Truncation stops once the term norm falls below
    ``ctrl.tol`` times the partial-sum norm for two consecutive terms;
    exhausting ``ctrl.max_terms`` first raises :class:`ConvergenceError`.

    For spectra with strongly negative real parts the series alternates
    and its condition number grows exponentially with ``k``; when the
    tracked cancellation exceeds what double precision can honor, the
    evaluation transparently re-runs at sufficient precision through a
    scalar diagonalization (see :func:`_mittag_leffler_precise`).
    """
    ctrl = ctrl or SeriesControl()
    n = float(n)
    if not 0.0 < n <= 1.0:
        raise DomainError(f"order must lie in (0, 1], got {n}")
    J = np.asarray(J)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise StructuralError("J must be square")
    p = J.shape[0]
    if p == 0:
        return J.copy(), 0
    if J.dtype.kind not in "fc":
        J = J.astype(float)
    k = int(k)
    x = k + n
    if x < 0:
        raise DomainError(f"offset k + n must be nonnegative, got {x}")
    rho = spectral_radius(J)
    if rho >= 1.0:
        raise SolvabilityError(
            f"series requires spectral radius < 1, got {rho:.6g}"
        )
    eye = np.eye(p, dtype=J.dtype)
    if x == 0.0:
        # only the i = 0 term survives: the rising power of 0 vanishes
        # for every positive exponent and equals 1 at exponent 0
        return eye / math.gamma(n), 1

    lg_x = math.lgamma(x)
    total = np.zeros_like(eye)
    power = eye
    abs_total = 0.0
    small_streak = 0
    terms = 0
    for i in range(ctrl.max_terms):
        coef = math.exp(math.lgamma(x + i * n) - lg_x - math.lgamma((i + 1.0) * n))
        term = power * coef
        total = total + term
        abs_total += float(np.linalg.norm(term))
        terms = i + 1
        if np.linalg.norm(term) <= ctrl.tol * max(np.linalg.norm(total), 1e-300):
            small_streak += 1
            if small_streak >= 2:
                break
        else:
            small_streak = 0
        power = power @ J
    else:
        raise ConvergenceError(
            f"series did not converge within {ctrl.max_terms} terms "
            f"(spectral radius {rho:.4g})"
        )
    norm_total = max(float(np.linalg.norm(total)), 1e-300)
    cancellation = abs_total / norm_total
    target = max(ctrl.tol, _ML_ACCURACY_FLOOR)
    if np.finfo(float).eps * cancellation > target:
        return _mittag_leffler_precise(J, k, n, ctrl, cancellation)
    return total, terms


def _mittag_leffler_precise(
    J: np.ndarray, k: int, n: float, ctrl: SeriesControl, cancellation: float
) -> tuple[np.ndarray, int]:
    """Cancellation-proof evaluation via scalar series at high precision.

    Diagonalizes ``J`` (the solvability condition already demands
    distinct eigenvalues) and sums the scalar series per eigenvalue with
    enough working digits to absorb the alternating-series cancellation
    measured by the float pass. The gamma coefficients are shared across
    eigenvalues. Non-diagonalizable input cannot take this route and
    raises :class:`ConvergenceError`.
    """
    import mpmath

    lam, V = np.linalg.eig(J)
    cond_V = float(np.linalg.cond(V))
    if not np.isfinite(cond_V) or cond_V > 1e8:
        raise ConvergenceError(
            "series cancellation exceeds double precision and the matrix "
            "is too far from diagonalizable for the scalar fallback "
            f"(cancellation {cancellation:.3g}, basis condition {cond_V:.3g})"
        )
    digits = min(300, 25 + int(math.log10(max(cancellation, 1.0))))
    terms_used = 0
    values = []
    with mpmath.workdps(digits):
        x = mpmath.mpf(k) + mpmath.mpf(n)
        nn = mpmath.mpf(n)
        gamma_x = mpmath.gamma(x)
        coeffs: list = []

        def coef(i: int):
            while len(coeffs) <= i:
                j = len(coeffs)
                coeffs.append(
                    mpmath.gamma(x + j * nn) / (gamma_x * mpmath.gamma((j + 1) * nn))
                )
            return coeffs[i]

        for ev in lam:
            z = mpmath.mpc(ev)
            total = mpmath.mpc(0)
            power = mpmath.mpc(1)
            small_streak = 0
            converged = False
            for i in range(ctrl.max_terms):
                term = power * coef(i)
                total += term
                if abs(term) <= ctrl.tol * max(abs(total), mpmath.mpf("1e-300")):
                    small_streak += 1
                    if small_streak >= 2:
                        terms_used = max(terms_used, i + 1)
                        converged = True
                        break
                else:
                    small_streak = 0
                power *= z
            if not converged:
                raise ConvergenceError(
                    f"scalar series did not converge within {ctrl.max_terms} terms"
                )
            values.append(complex(total))
    F = V @ np.diag(values) @ np.linalg.inv(V)
    if not np.iscomplexobj(J):
        F = F.real
    return F, terms_used

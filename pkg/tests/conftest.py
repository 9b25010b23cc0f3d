"""Shared fixtures and corpus builders.

The test corpora are built by conjugating exact canonical blocks with
random well-conditioned transformations, so every system carries its
ground truth (planted dimensions, eigenvalues, chain structure) along
with it. Seeds are fixed: the corpora are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from descsys import (
    DescriptorSystem,
    InputSignal,
    Pencil,
    WeierstrassForm,
    validate_weierstrass,
)

S1_F = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
S1_G = np.diag([0.5, 1.0, 1.0])
S1_C = np.array([[1.0, 0.0, 1.0]])


def well_conditioned(m: int, rng, spread=(0.6, 1.6)) -> np.ndarray:
    """Random matrix with singular values inside ``spread``."""
    left, _ = np.linalg.qr(rng.standard_normal((m, m)))
    right, _ = np.linalg.qr(rng.standard_normal((m, m)))
    return left @ np.diag(rng.uniform(*spread, m)) @ right


def nilpotent_canonical(sizes) -> np.ndarray:
    q = int(sum(sizes))
    H = np.zeros((q, q))
    pos = 0
    for s in sizes:
        for i in range(s - 1):
            H[pos + i, pos + i + 1] = 1.0
        pos += s
    return H


def jordan_canonical(blocks) -> np.ndarray:
    p = int(sum(size for _, size in blocks))
    J = np.zeros((p, p))
    pos = 0
    for eig, size in blocks:
        for i in range(size):
            J[pos + i, pos + i] = eig
            if i + 1 < size:
                J[pos + i, pos + i + 1] = 1.0
        pos += size
    return J


@dataclass
class PlantedSystem:
    """A pencil with its ground-truth canonical data."""

    pencil: Pencil
    p: int
    q: int
    q_star: int
    J: np.ndarray
    H: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    @property
    def m(self) -> int:
        return self.p + self.q


def conjugated_pencil(J, H, rng) -> PlantedSystem:
    """Pencil from exact canonical blocks and random transformations."""
    J = np.asarray(J, dtype=float)
    H = np.asarray(H, dtype=float)
    p, q = J.shape[0], H.shape[0]
    m = p + q
    P_inv = well_conditioned(m, rng)
    Q_inv = well_conditioned(m, rng)
    DF = np.zeros((m, m))
    DF[:p, :p] = np.eye(p)
    DF[p:, p:] = H
    DG = np.zeros((m, m))
    DG[:p, :p] = J
    DG[p:, p:] = np.eye(q)
    pencil = Pencil(P_inv @ DF @ Q_inv, P_inv @ DG @ Q_inv)
    sizes = _chain_sizes(H)
    return PlantedSystem(
        pencil=pencil,
        p=p,
        q=q,
        q_star=max(sizes) if sizes else 1,
        J=J,
        H=H,
        P=np.linalg.inv(P_inv),
        Q=np.linalg.inv(Q_inv),
    )


def _chain_sizes(H: np.ndarray) -> list[int]:
    sizes = []
    q = H.shape[0]
    pos = 0
    while pos < q:
        size = 1
        while pos + size - 1 < q - 1 and H[pos + size - 1, pos + size] == 1.0:
            size += 1
        sizes.append(size)
        pos += size
    return sizes


def distinct_eigs(count: int, rng, low=-0.9, high=0.9, gap=0.1) -> list[float]:
    eigs: list[float] = []
    while len(eigs) < count:
        c = float(rng.uniform(low, high))
        if all(abs(c - e) > gap for e in eigs):
            eigs.append(c)
    return eigs


def regular_corpus(count: int = 24, seed: int = 2024) -> list[PlantedSystem]:
    """Mixed-structure regular pencils with m <= 8."""
    rng = np.random.default_rng(seed)
    corpus = []
    nil_options = [[], [1], [2], [3], [1, 1], [2, 1], [3, 2], [2, 2], [3, 1]]
    for i in range(count):
        sizes = nil_options[i % len(nil_options)]
        q = sum(sizes)
        p = int(rng.integers(0 if q else 1, min(5, 8 - q) + 1))
        J = np.diag(distinct_eigs(p, rng)) if p else np.zeros((0, 0))
        H = nilpotent_canonical(sizes)
        corpus.append(conjugated_pencil(J, H, rng))
    return corpus


def invertible_corpus(count: int = 22, seed: int = 7) -> list[PlantedSystem]:
    """Systems with invertible F (no infinite part), m <= 6."""
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(count):
        p = int(rng.integers(1, 7))
        J = np.diag(distinct_eigs(p, rng))
        corpus.append(conjugated_pencil(J, np.zeros((0, 0)), rng))
    return corpus


def singular_corpus(count: int = 12, seed: int = 99) -> list[PlantedSystem]:
    """Singular-F systems with q_star in {1, 2, 3} and m <= 6."""
    rng = np.random.default_rng(seed)
    nil_options = [[1], [2], [3], [1, 1], [2, 1], [3, 1], [2, 2], [3, 2], [1, 1, 1]]
    corpus = []
    for i in range(count):
        sizes = nil_options[i % len(nil_options)]
        q = sum(sizes)
        p = int(rng.integers(1, min(4, 6 - q) + 1))
        J = np.diag(distinct_eigs(p, rng, low=-0.85, high=0.85))
        corpus.append(conjugated_pencil(J, nilpotent_canonical(sizes), rng))
    return corpus


def attach(planted: PlantedSystem, C=None, B=None) -> DescriptorSystem:
    """DescriptorSystem around a planted pencil, decomposition computed."""
    m = planted.m
    if C is None:
        C = np.eye(m)
    system = DescriptorSystem(planted.pencil, C=np.asarray(C, dtype=float), B=B)
    return system.with_weierstrass()


def random_signal(dim: int, k_max: int, rng, scale: float = 1.0) -> InputSignal:
    return InputSignal(scale * rng.standard_normal((k_max + 1, dim)))


@pytest.fixture(scope="session")
def s1_pencil() -> Pencil:
    return Pencil(S1_F, S1_G)


@pytest.fixture(scope="session")
def s1_wf(s1_pencil) -> WeierstrassForm:
    # exact canonical coordinates: the identity transformations work
    raw = WeierstrassForm(
        P=np.eye(3),
        Q=np.eye(3),
        J_p=np.array([[0.5]]),
        H_q=np.array([[0.0, 1.0], [0.0, 0.0]]),
        p=1,
        q=2,
        q_star=2,
    )
    return validate_weierstrass(s1_pencil, raw)


@pytest.fixture(scope="session")
def s1_system(s1_pencil, s1_wf) -> DescriptorSystem:
    return DescriptorSystem(s1_pencil, C=S1_C, wf=s1_wf)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed tests measure math, not JIT."""
    from descsys import _kernels

    w = np.ones(4)
    seq = np.ones((4, 2))
    _kernels.weighted_history_sums(w, seq)
    _kernels.matrix_kernel_convolution(np.ones((4, 2, 2)), seq)
    yield

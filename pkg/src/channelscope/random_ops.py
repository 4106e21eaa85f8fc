"""Seeded random states and channels for property checks."""

from __future__ import annotations

import numpy as np

from .channels import KrausChannel


def _ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a Ginibre matrix with the phases of R divided out."""
    q, r = np.linalg.qr(_ginibre(rng, (d, d)))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = _ginibre(rng, d)
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default)."""
    g = _ginibre(rng, (d, rank or d))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = _ginibre(rng, (d, d))
    return (g + g.conj().T) / 2


def random_channel(num_qubits: int, rng: np.random.Generator, num_kraus: int | None = None) -> KrausChannel:
    """Random CPTP map from a random isometry split into Kraus blocks."""
    d = 2**num_qubits
    k = num_kraus or int(rng.integers(1, d * d + 1))
    q, r = np.linalg.qr(_ginibre(rng, (k * d, d)))
    v = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausChannel(tuple(v[i * d:(i + 1) * d] for i in range(k)), num_qubits)


def random_separable_map(rng: np.random.Generator, max_terms: int = 4) -> KrausChannel:
    """Convex mixture of up to ``max_terms`` product unitaries U_A (x) U_B on two qubits."""
    m = int(rng.integers(1, max_terms + 1))
    weights = rng.dirichlet(np.ones(m))
    ops = [np.sqrt(w) * np.kron(random_unitary(2, rng), random_unitary(2, rng)) for w in weights]
    return KrausChannel(tuple(ops), 2)

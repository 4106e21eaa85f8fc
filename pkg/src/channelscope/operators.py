"""Dense operator algebra on small qubit registers.

Conventions used throughout the package:

* Qubit 0 is the most significant tensor factor, so ``tensor(a, b)`` puts
  ``a`` on the leading qubits.
* Qubit indices are 0-based. The four-qubit Choi register labelled 1, 2, 3, 4
  in the usual notation is stored as indices 0, 1, 2, 3.
* Matrices are ``numpy`` ``complex128`` arrays; kets are 1-D arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """A real multiple of a tensor product of Pauli matrices.

    ``letters`` is a string over ``IXYZ``, one letter per qubit, qubit 0 first.
    """

    letters: str
    coefficient: float = 1.0

    def __post_init__(self):
        letters = str(self.letters).upper()
        if not letters or set(letters) - set("IXYZ"):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        if not np.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def matrix(self) -> np.ndarray:
        return pauli_string_matrix(self)

    def __str__(self):
        return f"{self.coefficient:+g}*{self.letters}"


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def num_qubits_of(m: np.ndarray) -> int:
    """Number of qubits for a square matrix (or ket) of side ``2**n``."""
    dim = m.shape[0]
    if m.ndim == 2 and m.shape[1] != dim:
        raise ValueError(f"matrix is not square: {m.shape}")
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def tensor(*factors) -> np.ndarray:
    """Kronecker product of the given matrices or kets, left factor most significant."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def basis_ket(bits: str) -> np.ndarray:
    """Computational basis ket, e.g. ``basis_ket("01")`` is |0>|1>."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def maximally_entangled(d: int) -> np.ndarray:
    """The ket (1/sqrt(d)) sum_k |k>|k> on a d*d dimensional space."""
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    d = int(d)
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1.0 / np.sqrt(d)
    return v


def bell_state(which: str) -> np.ndarray:
    """Two-qubit Bell ket; ``which`` is one of ``phi+``, ``phi-``, ``psi+``, ``psi-``."""
    key = which.lower().replace("φ", "phi").replace("ψ", "psi").replace("⁺", "+").replace("⁻", "-")
    s = 1 / np.sqrt(2)
    table = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    if key not in table:
        raise ValueError(f"unknown Bell state {which!r}; expected one of {BELL_LABELS}")
    return np.array(table[key], dtype=complex)


def projector(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def permute_qubits(m: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder qubits of a ket or square matrix.

    Qubit ``i`` of the result is qubit ``order[i]`` of the input.
    """
    m = np.asarray(m, dtype=complex)
    n = num_qubits_of(m)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} qubits")
    if m.ndim == 1:
        return m.reshape([2] * n).transpose(order).reshape(2**n)
    axes = order + [n + k for k in order]
    return m.reshape([2] * (2 * n)).transpose(axes).reshape(2**n, 2**n)


def _check_indices(indices: Iterable[int], n: int, what: str) -> list[int]:
    idx = sorted(set(int(i) for i in indices))
    if not idx:
        raise ValueError(f"{what} must be nonempty")
    if idx[0] < 0 or idx[-1] >= n:
        raise IndexError(f"{what} {idx} out of range for {n} qubits")
    return idx


def partial_trace(rho, keep: Iterable[int]) -> np.ndarray:
    """Reduced operator on the qubits in ``keep`` (their relative order is preserved)."""
    rho = _as_matrix(rho)
    n = num_qubits_of(rho)
    keep = _check_indices(keep, n, "keep")
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape([2] * (2 * n))
    # trace out from the highest index so remaining axis numbers stay valid
    for k in reversed(traced):
        nq = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + nq)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def partial_transpose(rho, transposed: Iterable[int]) -> np.ndarray:
    """Transpose the qubits in ``transposed``, leaving the rest untouched."""
    rho = _as_matrix(rho)
    n = num_qubits_of(rho)
    idx = _check_indices(transposed, n, "transposed")
    axes = list(range(2 * n))
    for k in idx:
        axes[k], axes[k + n] = axes[k + n], axes[k]
    return rho.reshape([2] * (2 * n)).transpose(axes).reshape(2**n, 2**n)


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def _jacobi_symmetric(a: np.ndarray, tol: float, max_sweeps: int) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations."""
    a = a.copy()
    n = a.shape[0]
    scale = max(1.0, np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
    raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def hermitian_eigenvalues(m, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix.

    The complex matrix A + iB is embedded as the real symmetric matrix
    [[A, -B], [B, A]], whose spectrum is that of A + iB with every
    eigenvalue doubled; the duplicates are dropped after diagonalising.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix is not square: {m.shape}")
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within 1e-10")
    m = (m + m.conj().T) / 2
    a, b = m.real, m.imag
    embedded = np.block([[a, -b], [b, a]])
    return _jacobi_symmetric(embedded, tol, max_sweeps)[::2].copy()


def expectation(observable, rho) -> float:
    """Tr[O rho] for a Hermitian observable."""
    observable = _as_matrix(observable)
    rho = _as_matrix(rho)
    if observable.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {observable.shape} vs {rho.shape}")
    if not is_hermitian(observable):
        raise NotHermitianError("observable is not Hermitian")
    value = np.einsum("ij,ji->", observable, rho)
    if abs(value.imag) > 1e-12:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}; is rho Hermitian?")
    return float(value.real)


def pauli_string_matrix(s: PauliString | str) -> np.ndarray:
    """Coefficient times the tensor product of the listed Paulis."""
    if isinstance(s, str):
        s = PauliString(s)
    return s.coefficient * tensor(*(PAULI[c] for c in s.letters))


def density_violations(rho) -> list[str]:
    """List the density-operator invariants that ``rho`` breaks (empty if valid)."""
    problems = []
    try:
        rho = _as_matrix(rho)
        num_qubits_of(rho)
    except ValueError as exc:
        return [str(exc)]
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-12:
        problems.append(f"not Hermitian (max deviation {herm:.2e})")
        return problems
    tr = np.trace(rho).real
    if abs(tr - 1) > TRACE_TOL:
        problems.append(f"trace {tr!r} != 1")
    lam = hermitian_eigenvalues(rho)[0]
    if lam < -PSD_TOL:
        problems.append(f"negative eigenvalue {lam:.3e}")
    return problems


def is_density_matrix(rho) -> bool:
    return not density_violations(rho)


def as_density(rho) -> np.ndarray:
    """Validate and return ``rho`` as a density matrix, raising ValueError otherwise."""
    problems = density_violations(rho)
    if problems:
        raise ValueError("not a density operator: " + "; ".join(problems))
    return _as_matrix(rho)

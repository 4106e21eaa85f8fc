"""Witness operators for channel detection and their closed-form expectations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .channels import _check_unit
from .choi import ExperimentModelParams, cnot_choi_ket
from .operators import (
    PauliString,
    _as_matrix,
    expectation,
    is_hermitian,
    num_qubits_of,
    pauli_string_matrix,
    projector,
)

DECOMPOSITION_TOL = 1e-12


def pauli_decomposition(h, tol: float = DECOMPOSITION_TOL) -> tuple[PauliString, ...]:
    """Expand a Hermitian matrix as sum_P Tr[P H]/2^n P over all Pauli strings."""
    h = _as_matrix(h)
    n = num_qubits_of(h)
    terms = []
    for letters in itertools.product("IXYZ", repeat=n):
        s = "".join(letters)
        c = np.einsum("ij,ji->", pauli_string_matrix(s), h).real / 2**n
        if abs(c) > tol:
            terms.append(PauliString(s, c))
    return tuple(terms)


@dataclass(frozen=True, eq=False)
class Witness:
    """A Hermitian detection operator with its Pauli expansion."""

    name: str
    terms: tuple
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if not is_hermitian(m, 1e-12):
            raise ValueError(f"witness {self.name} is not Hermitian")
        rebuilt = sum(pauli_string_matrix(t) for t in self.terms)
        if np.max(np.abs(rebuilt - m)) > 1e-12:
            raise ValueError(f"Pauli terms of {self.name} do not reproduce its matrix")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, name: str, matrix) -> "Witness":
        return cls(name, pauli_decomposition(matrix), matrix)

    @property
    def num_qubits(self) -> int:
        return num_qubits_of(self.matrix)

    @property
    def identity_coefficient(self) -> float:
        ident = "I" * self.num_qubits
        return sum(t.coefficient for t in self.terms if t.letters == ident)

    def expectation(self, rho) -> float:
        return expectation(self.matrix, np.asarray(rho))


@dataclass(frozen=True)
class ThresholdResult:
    root: float
    bracket: tuple
    tolerance: float
    iterations: int = 0


class NoSignChangeError(ValueError):
    pass


@lru_cache(maxsize=None)
def w_eb() -> Witness:
    """(II - XX + YY - ZZ)/4, detecting non entanglement-breaking single-qubit channels."""
    terms = (
        PauliString("II", 0.25),
        PauliString("XX", -0.25),
        PauliString("YY", 0.25),
        PauliString("ZZ", -0.25),
    )
    return Witness("W_EB", terms, sum(pauli_string_matrix(t) for t in terms))


@lru_cache(maxsize=None)
def w_cnot() -> Witness:
    """Optimal CNOT witness I/2 - |CNOT><CNOT| on the four-qubit Choi register."""
    return Witness.from_matrix("W_CNOT", np.eye(16) / 2 - projector(cnot_choi_ket()))


@lru_cache(maxsize=None)
def w_cnot_suboptimal() -> Witness:
    """Two-setting CNOT witness 3I - 2[Pa Pb + Pc Pd] built from commuting projectors."""
    eye = np.eye(16, dtype=complex)
    pa = (eye + pauli_string_matrix("IXXX")) / 2
    pb = (eye + pauli_string_matrix("XIXI")) / 2
    pc = (eye - pauli_string_matrix("IZIZ")) / 2
    pd = (eye + pauli_string_matrix("ZZZI")) / 2
    return Witness.from_matrix("W_CNOT_sub", 3 * eye - 2 * (pa @ pb + pc @ pd))


def w_eb_expectation_ideal(p: float) -> float:
    _check_unit("p", p)
    return p - 0.5


def w_eb_expectation_model(p: float, f0: float) -> float:
    """<W_EB> on the depolarizing Choi state made from a source of fidelity f0."""
    _check_unit("p", p)
    if not (0.25 <= f0 <= 1):
        raise ValueError(f"f0={f0} outside [1/4, 1]")
    return (4 * f0 - 1) / 3 * (p - 0.5) + (1 - f0) / 3


def mu_c_lower_bound(w_value: float) -> float:
    """Lower bound 2|w|/(1 + 2|w|) on the classical noise needed to make the channel EB.

    Returns 0 for nonnegative witness values, where the bound is trivial.
    """
    if w_value >= 0:
        return 0.0
    a = 2 * abs(w_value)
    return a / (1 + a)


def w_cnot_expectation_dephased(q1: float, q2: float) -> float:
    """<W_CNOT_sub> on the Choi state of the dephased CNOT (pure anchor)."""
    _check_unit("q1", q1)
    _check_unit("q2", q2)
    return 1 - 2 * ((1 - q1) ** 2 * (1 - q2) ** 2 + q1 * q2 * (1 - q1 * q2))


def si_expectation(q: float, params: ExperimentModelParams | None = None) -> float:
    """<W_CNOT_sub> for q1 = q2 = q with source visibility nu_pi and path dephasing eta_k."""
    _check_unit("q", q)
    params = params or ExperimentModelParams()
    nu, eta = params.nu_pi, params.eta_k
    return (
        1
        - 2 * nu
        + 2 * (2 * q**3 + eta * (eta - 1) * (2 * q - 1) ** 3) * (1 + nu)
        - 2 * q**2 * (3 + 4 * nu)
        + q * (3 + 5 * nu)
    )


def _compatible(term: str, setting: str) -> bool:
    return all(t == "I" or t == s for t, s in zip(term, setting))


@lru_cache(maxsize=64)
def _minimal_cover(terms: tuple[str, ...]) -> tuple[str, ...]:
    """Smallest set of full-weight settings covering every term (exact branch and bound)."""
    n = len(terms[0])
    candidates = ["".join(c) for c in itertools.product("XYZ", repeat=n)]
    covers = {s: frozenset(i for i, t in enumerate(terms) if _compatible(t, s)) for s in candidates}
    best: list[list[str]] = [None]

    def search(uncovered: frozenset, chosen: list[str]):
        if best[0] is not None and len(chosen) >= len(best[0]):
            return
        if not uncovered:
            best[0] = list(chosen)
            return
        # branch on the term with the fewest options
        pivot = min(uncovered, key=lambda i: sum(i in c for c in covers.values()))
        options = {}
        for s, c in covers.items():
            if pivot in c:
                key = c & uncovered
                if key not in options:
                    options[key] = s
        # drop options whose coverage is a strict subset of another option's
        keys = sorted(options, key=len, reverse=True)
        maximal = [k for k in keys if not any(k < other for other in keys)]
        for key in maximal:
            search(uncovered - key, chosen + [options[key]])

    search(frozenset(range(len(terms))), [])
    return tuple(sorted(best[0]))


def measurement_settings(w: Witness) -> list[str]:
    """Minimal list of local Pauli settings (e.g. ``"XXXX"``) that measure every term of ``w``.

    A term is measured by a setting when it agrees with the setting on all of
    its non-identity letters. The identity term needs no setting.
    """
    terms = tuple(sorted({t.letters for t in w.terms if t.weight > 0}))
    if not terms:
        return []
    return list(_minimal_cover(terms))


def assign_terms(w: Witness, settings: Sequence[str]) -> dict[str, list[PauliString]]:
    """Map each setting to the non-identity terms it is responsible for (first match wins)."""
    groups: dict[str, list[PauliString]] = {s: [] for s in settings}
    for t in w.terms:
        if t.weight == 0:
            continue
        for s in settings:
            if _compatible(t.letters, s):
                groups[s].append(t)
                break
        else:
            raise ValueError(f"term {t.letters} is not covered by settings {list(settings)}")
    return groups


def detection_threshold(
    curve: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-6,
    max_iter: int = 60,
) -> ThresholdResult:
    """Bisection root of ``curve`` on [lo, hi]; the bracket must change sign."""
    f_lo, f_hi = curve(lo), curve(hi)
    if f_lo == 0:
        return ThresholdResult(lo, (lo, lo), tol)
    if f_hi == 0:
        return ThresholdResult(hi, (hi, hi), tol)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoSignChangeError(f"no sign change on [{lo}, {hi}]: f={f_lo:.6g}, {f_hi:.6g}")
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        f_mid = curve(mid)
        it += 1
        if f_mid == 0:
            return ThresholdResult(mid, (mid, mid), tol, it)
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return ThresholdResult(0.5 * (lo + hi), (lo, hi), tol, it)

"""Choi states of one- and two-qubit channels and the imperfect-source models.

Register layouts
----------------
One-qubit maps: qubit 0 is the channel output, qubit 1 the untouched
ancilla, anchored on |Phi+>.

Two-qubit maps: four qubits ordered (1, 2, 3, 4) -> indices (0, 1, 2, 3).
The map acts on indices 0 and 1; indices 2 and 3 are ancillas. The anchor is
|Phi+> on (0, 2) times |Psi+> on (1, 3). This anchor is not the standard
|Phi+>|Phi+> pairing, so the Choi state of the CNOT comes out as the
hyperentangled state produced by the photonic source.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channels as ch_mod
from .channels import KrausChannel, DephasingParams, _check_unit
from .operators import (
    _as_matrix,
    basis_ket,
    bell_state,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    permute_qubits,
    projector,
    tensor,
    PSD_TOL,
)

TWO_PARTY = "two_party"
FOUR_PARTY = "four_party"

# (0, 2, 1, 3) storage order <-> register order 1, 2, 3, 4
_PAIRED_TO_REGISTER = (0, 2, 1, 3)

PHI_PLUS = bell_state("phi+")
PSI_PLUS = bell_state("psi+")


def _from_pairs(pair_13, pair_24) -> np.ndarray:
    """Place a ket/operator on (1,3) and one on (2,4) into register order 1,2,3,4."""
    return permute_qubits(tensor(pair_13, pair_24), _PAIRED_TO_REGISTER)


def two_qubit_anchor() -> np.ndarray:
    """|alpha> = |Phi+>_13 |Psi+>_24 in register order 1, 2, 3, 4."""
    return _from_pairs(PHI_PLUS, PSI_PLUS)


@dataclass(frozen=True, eq=False)
class ChoiState:
    """A Choi state together with its register structure.

    ``structure`` is ``"two_party"`` (4x4, system then ancilla) or
    ``"four_party"`` (16x16, register 1,2,3,4 with ancillas 3 and 4).
    """

    state: np.ndarray
    structure: str = TWO_PARTY
    anchor: str = "|Phi+>"

    def __post_init__(self):
        m = _as_matrix(self.state)
        object.__setattr__(self, "state", m)
        if self.structure == TWO_PARTY:
            expected_shape, ancillas = (4, 4), [1]
            marginal = np.eye(2) / 2
        elif self.structure == FOUR_PARTY:
            expected_shape, ancillas = (16, 16), [2, 3]
            marginal = partial_trace(projector(two_qubit_anchor()), [2, 3])
        else:
            raise ValueError(f"unknown Choi structure {self.structure!r}")
        if m.shape != expected_shape:
            raise ValueError(f"{self.structure} Choi state must be {expected_shape}, got {m.shape}")
        err = np.max(np.abs(partial_trace(m, ancillas) - marginal))
        if err > 1e-10:
            raise ValueError(f"ancilla marginal deviates by {err:.2e}; map is not trace preserving")

    @property
    def num_qubits(self) -> int:
        return 2 if self.structure == TWO_PARTY else 4

    def __array__(self, dtype=None, copy=None):
        return self.state if dtype is None else self.state.astype(dtype)


@dataclass(frozen=True)
class ExperimentModelParams:
    """Source imperfections.

    ``f0`` is the fidelity of the polarization pair to |Phi+>, ``nu_pi`` the
    polarization visibility of the hyperentangled source and ``eta_k`` the
    beam-splitter dephasing strength on the path qubits. Defaults are the
    measured values.
    """

    f0: float = 0.935
    nu_pi: float = 0.858
    eta_k: float = 0.025

    def __post_init__(self):
        if not (0.25 <= self.f0 <= 1):
            raise ValueError(f"f0={self.f0} outside [1/4, 1]")
        _check_unit("nu_pi", self.nu_pi)
        _check_unit("eta_k", self.eta_k, 0.5)

    @classmethod
    def ideal(cls) -> "ExperimentModelParams":
        return cls(f0=1.0, nu_pi=1.0, eta_k=0.0)


def choi_of_channel(ch: KrausChannel) -> ChoiState:
    if ch.num_qubits == 1:
        state = ch_mod.apply(ch_mod.extend(ch, 1), projector(PHI_PLUS))
        return ChoiState(state, TWO_PARTY, "|Phi+>")
    if ch.num_qubits == 2:
        state = ch_mod.apply(ch_mod.extend(ch, 2), projector(two_qubit_anchor()))
        return ChoiState(state, FOUR_PARTY, "|Phi+>_13|Psi+>_24")
    raise ValueError(f"Choi states are supported for 1- and 2-qubit maps, not {ch.num_qubits}")


def channel_from_choi(c: ChoiState, rho) -> np.ndarray:
    """Recover M[rho] = 2 Tr_anc[C (I (x) rho^T)] from a one-qubit Choi state."""
    if c.structure != TWO_PARTY:
        raise ValueError("channel_from_choi needs a two_party Choi state")
    rho = _as_matrix(rho)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a single-qubit state, got shape {rho.shape}")
    return 2 * partial_trace(c.state @ np.kron(np.eye(2), rho.T), [0])


def werner_choi(p: float) -> ChoiState:
    """Closed-form Choi state of the depolarizing channel."""
    _check_unit("p", p)
    state = (1 - 4 * p / 3) * projector(PHI_PLUS) + (p / 3) * np.eye(4)
    return ChoiState(state, TWO_PARTY)


def experimental_werner_choi(p: float, f0: float) -> ChoiState:
    """Depolarizing Choi state when the source pair has fidelity ``f0`` to |Phi+>.

    The imperfect pair is taken as f0 on |Phi+> and (1 - f0)/3 on each other
    Bell state.
    """
    _check_unit("p", p)
    if not (0.25 <= f0 <= 1):
        raise ValueError(f"f0={f0} outside [1/4, 1]")
    shrink = (4 * f0 - 1) / 3
    state = (1 - 4 * p / 3) * shrink * projector(PHI_PLUS) + (
        (p / 3) * shrink + (1 - f0) / 3
    ) * np.eye(4)
    return ChoiState(state, TWO_PARTY)


def cnot_choi_ket() -> np.ndarray:
    """(|Phi+>_13 |01>_24 + |Psi+>_13 |10>_24) / sqrt(2) in register order 1,2,3,4."""
    return (_from_pairs(PHI_PLUS, basis_ket("01")) + _from_pairs(PSI_PLUS, basis_ket("10"))) / np.sqrt(2)


def experimental_cnot_input(nu_pi: float) -> np.ndarray:
    """Anchor state with the polarization pair (1,3) mixed toward white noise."""
    _check_unit("nu_pi", nu_pi)
    pol = nu_pi * projector(PHI_PLUS) + (1 - nu_pi) * np.eye(4) / 4
    return _from_pairs(pol, projector(PSI_PLUS))


def noisy_cnot_choi(q1: float, q2: float, params: ExperimentModelParams | None = None) -> np.ndarray:
    """Four-qubit output: beam-splitter dephasing after the dephased CNOT on the imperfect input."""
    params = params or ExperimentModelParams()
    gate = ch_mod.extend(ch_mod.noisy_cnot(DephasingParams(q1, q2)), 2)
    out = ch_mod.apply(gate, experimental_cnot_input(params.nu_pi))
    return ch_mod.apply(ch_mod.bs_dephasing(params.eta_k), out)


def is_ppt(rho, transposed) -> tuple[bool, float]:
    """PPT test across the cut defined by ``transposed``; returns (verdict, min eigenvalue)."""
    rho = _as_matrix(np.asarray(rho))
    lam = float(hermitian_eigenvalues(partial_transpose(rho, transposed))[0])
    return lam >= -PSD_TOL, lam


def is_entanglement_breaking(ch: KrausChannel) -> bool:
    """Exact EB test for single-qubit channels via PPT of the Choi state.

    PPT is only sufficient for separability in 2x2 and 2x3, so wider channels
    are rejected rather than given a possibly wrong answer.
    """
    if ch.num_qubits != 1:
        raise ValueError("entanglement-breaking test is only exact for single-qubit channels")
    return is_ppt(choi_of_channel(ch).state, [1])[0]

"""Quantum channels in Kraus form.

Includes the Pauli noise channels (depolarizing, dephasing), the CNOT gate,
composition and tensor products, the dephased CNOT, the time-multiplexed
Pauli mixture produced by switching liquid-crystal retarders during a
detection gate, and the beam-splitter dephasing acting on the path qubits of
the four-qubit register.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import (
    PAULI,
    PauliString,
    _as_matrix,
    maximally_entangled,
    num_qubits_of,
    pauli_string_matrix,
    projector,
)

COMPLETENESS_TOL = 1e-12
PRUNE_TOL = 1e-14
CHANNEL_EQ_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CPTP map given by Kraus operators acting on ``num_qubits`` qubits.

    Operators whose Frobenius norm is below 1e-14 are dropped on
    construction. Use :func:`channels_equal` to compare channels; Kraus lists
    are not unique.
    """

    kraus_ops: tuple
    num_qubits: int

    def __post_init__(self):
        ops = [_as_matrix(k) for k in self.kraus_ops]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        dim = 2**self.num_qubits
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError(f"Kraus operator of shape {k.shape} on {self.num_qubits} qubits")
        kept = tuple(k for k in ops if np.linalg.norm(k) >= PRUNE_TOL)
        if not kept:
            raise ValueError("all Kraus operators vanish")
        total = sum(k.conj().T @ k for k in kept)
        err = np.max(np.abs(total - np.eye(dim)))
        if err > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (deviation {err:.2e})")
        object.__setattr__(self, "kraus_ops", kept)

    @classmethod
    def from_ops(cls, ops: Sequence[np.ndarray]) -> "KrausChannel":
        ops = [_as_matrix(k) for k in ops]
        return cls(tuple(ops), num_qubits_of(ops[0]))

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def __call__(self, rho):
        return apply(self, rho)

    def __len__(self):
        return len(self.kraus_ops)


@dataclass(frozen=True)
class NoiseSchedule:
    """Fractions of a detection gate spent in each single-qubit Pauli configuration.

    A configuration held for a time ``delta`` out of a gate of duration ``T``
    gets fraction ``delta / T``.
    """

    segments: tuple

    def __post_init__(self):
        segs = []
        for config, fraction in self.segments:
            if not isinstance(config, PauliString):
                config = PauliString(config)
            if config.num_qubits != 1:
                raise ValueError("schedule configurations act on a single qubit")
            if fraction < 0 or fraction > 1:
                raise ValueError(f"fraction {fraction} outside [0, 1]")
            segs.append((config, float(fraction)))
        if not segs:
            raise ValueError("empty schedule")
        total = sum(f for _, f in segs)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"fractions sum to {total!r}, not 1")
        object.__setattr__(self, "segments", tuple(segs))

    @property
    def fractions(self) -> tuple:
        return tuple(f for _, f in self.segments)


@dataclass(frozen=True)
class DephasingParams:
    """Dephasing strengths before (``q1``) and after (``q2``) the CNOT."""

    q1: float = 0.0
    q2: float = 0.0

    def __post_init__(self):
        _check_unit("q1", self.q1)
        _check_unit("q2", self.q2)


def _check_unit(name: str, value: float, hi: float = 1.0):
    if not (0.0 <= value <= hi):
        raise ValueError(f"{name}={value} outside [0, {hi}]")


def apply(ch: KrausChannel, rho) -> np.ndarray:
    rho = _as_matrix(rho)
    if rho.shape != (ch.dim, ch.dim):
        raise ValueError(f"channel on {ch.num_qubits} qubits applied to matrix of shape {rho.shape}")
    ops = np.stack(ch.kraus_ops)
    return (ops @ rho @ ops.conj().transpose(0, 2, 1)).sum(axis=0)


def identity_channel(num_qubits: int = 1) -> KrausChannel:
    return KrausChannel((np.eye(2**num_qubits, dtype=complex),), num_qubits)


def unitary_channel(u) -> KrausChannel:
    return KrausChannel.from_ops([u])


def pauli_channel(weights: dict) -> KrausChannel:
    """Single-qubit channel rho -> sum_i w_i P_i rho P_i for Pauli letters ``P_i``."""
    return KrausChannel.from_ops([np.sqrt(w) * PAULI[letter] for letter, w in weights.items()])


def depolarizing(p: float) -> KrausChannel:
    """Weights 1 - p on the identity and p/3 on each of X, Y, Z."""
    _check_unit("p", p)
    return pauli_channel({"I": 1 - p, "X": p / 3, "Y": p / 3, "Z": p / 3})


def dephasing(q: float) -> KrausChannel:
    _check_unit("q", q)
    return pauli_channel({"I": 1 - q, "Z": q})


def cnot_unitary() -> np.ndarray:
    """CNOT with qubit 0 as target and qubit 1 as control: |t>|c> -> |t xor c>|c>."""
    u = np.zeros((4, 4), dtype=complex)
    for t in (0, 1):
        for c in (0, 1):
            u[2 * (t ^ c) + c, 2 * t + c] = 1
    return u


def cnot_gate() -> KrausChannel:
    return unitary_channel(cnot_unitary())


def compose(outer: KrausChannel, inner: KrausChannel) -> KrausChannel:
    """The channel ``outer o inner`` (``inner`` acts first)."""
    if outer.num_qubits != inner.num_qubits:
        raise ValueError(f"cannot compose {outer.num_qubits}- and {inner.num_qubits}-qubit channels")
    return KrausChannel(tuple(a @ b for a in outer.kraus_ops for b in inner.kraus_ops), outer.num_qubits)


def tensor_channels(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """``a`` on the leading qubits, ``b`` on the trailing ones."""
    return KrausChannel(
        tuple(np.kron(x, y) for x in a.kraus_ops for y in b.kraus_ops),
        a.num_qubits + b.num_qubits,
    )


def extend(ch: KrausChannel, extra_qubits: int) -> KrausChannel:
    """Lift ``ch`` to act as ``ch`` (x) identity on ``extra_qubits`` appended qubits."""
    if extra_qubits == 0:
        return ch
    return tensor_channels(ch, identity_channel(extra_qubits))


def noisy_cnot(params: DephasingParams) -> KrausChannel:
    """Dephasing of strength q1 on both qubits, then CNOT, then dephasing q2 on both."""
    before = tensor_channels(dephasing(params.q1), dephasing(params.q1))
    after = tensor_channels(dephasing(params.q2), dephasing(params.q2))
    return compose(after, compose(cnot_gate(), before))


def depolarizing_schedule(p: float) -> NoiseSchedule:
    _check_unit("p", p)
    segments = [("I", 1 - p)]
    if p > 0:
        segments += [("X", p / 3), ("Y", p / 3), ("Z", p / 3)]
    return NoiseSchedule(tuple(segments))


def mixture_from_schedule(s: NoiseSchedule) -> KrausChannel:
    return KrausChannel.from_ops([np.sqrt(f) * pauli_string_matrix(config) for config, f in s.segments])


def bs_dephasing(eta_k: float) -> KrausChannel:
    """Dephasing of the path qubits (indices 1 and 3) of the four-qubit register."""
    _check_unit("eta_k", eta_k, 0.5)
    weights = {
        "IIII": (1 - eta_k) ** 2,
        "IZII": eta_k * (1 - eta_k),
        "IIIZ": eta_k * (1 - eta_k),
        "IZIZ": eta_k**2,
    }
    return KrausChannel.from_ops([np.sqrt(w) * pauli_string_matrix(s) for s, w in weights.items()])


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """Choi state (ch (x) id)[|Phi><Phi|] with the standard anchor, ancillas last.

    This is the canonical representation used for channel equality. The
    register layouts used for witness experiments live in :mod:`channelscope.choi`.
    """
    n = ch.num_qubits
    # |Phi> = sum_k |k>|k>/sqrt(d) pairs qubit j with ancilla n + j
    anchor = projector(maximally_entangled(ch.dim))
    return apply(extend(ch, n), anchor)


def channel_distance(a: KrausChannel, b: KrausChannel) -> float:
    """Maximum absolute entry difference between the Choi matrices."""
    if a.num_qubits != b.num_qubits:
        return float("inf")
    return float(np.max(np.abs(choi_matrix(a) - choi_matrix(b))))


def channels_equal(a: KrausChannel, b: KrausChannel, tol: float = CHANNEL_EQ_TOL) -> bool:
    return channel_distance(a, b) < tol


__all__ = [
    "KrausChannel",
    "NoiseSchedule",
    "DephasingParams",
    "apply",
    "identity_channel",
    "unitary_channel",
    "pauli_channel",
    "depolarizing",
    "dephasing",
    "cnot_unitary",
    "cnot_gate",
    "compose",
    "tensor_channels",
    "extend",
    "noisy_cnot",
    "depolarizing_schedule",
    "mixture_from_schedule",
    "bs_dephasing",
    "choi_matrix",
    "channel_distance",
    "channels_equal",
]

"""Simulated coincidence statistics and witness estimation.

Each measurement setting assigns one Pauli basis per qubit and records all
2^n outcome counts at once. Counts are Poisson with mean
``shots_per_setting * probability``. Estimates carry first-order (delta
method) Poisson error bars; independent settings add in quadrature.

Random streams come from ``numpy.random.Generator`` over the counter-based
Philox bit generator, keyed by ``(seed, *stream_key)`` so that sweeps can
derive one independent stream per grid point and setting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .operators import PauliString, _as_matrix, num_qubits_of, tensor
from .witnesses import Witness, _compatible, assign_terms, measurement_settings

_SQ = 1 / np.sqrt(2)
# rows are the +1 and -1 eigenvectors (conjugated) of each Pauli
_BASIS_CHANGE = {
    "Z": np.eye(2, dtype=complex),
    "X": np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex),
    "Y": np.array([[_SQ, -1j * _SQ], [_SQ, 1j * _SQ]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class CoincidenceRecord:
    """Counts for one setting; ``counts[b]`` is the outcome bitstring ``b`` (bit 0 means +1)."""

    setting: str
    counts: np.ndarray
    total_expected: float

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (2 ** len(self.setting),):
            raise ValueError(f"{len(counts)} counts for setting {self.setting}")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class EstimationResult:
    value: float
    sigma: float
    shots_per_setting: float
    seed: int
    records: tuple = field(default=(), repr=False, compare=False)


def make_rng(seed: int, *stream_key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *stream_key)``; same key, same stream."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in stream_key)])
    return np.random.Generator(np.random.Philox(ss))


def outcome_probabilities(rho, setting: str) -> np.ndarray:
    """Probabilities of the 2^n outcome bitstrings when measuring each qubit in ``setting``."""
    rho = _as_matrix(rho)
    n = num_qubits_of(rho)
    if len(setting) != n:
        raise ValueError(f"setting {setting!r} has {len(setting)} letters for {n} qubits")
    try:
        v = tensor(*(_BASIS_CHANGE[c] for c in setting.upper()))
    except KeyError:
        raise ValueError(f"settings use X, Y, Z only, got {setting!r}") from None
    return np.einsum("ij,ij->i", v @ rho, v.conj()).real


def sample_counts(probs, total_expected: float, seed: int = 0, setting: str | None = None,
                  rng: np.random.Generator | None = None) -> CoincidenceRecord:
    """Independent Poisson counts with means ``total_expected * probs``."""
    probs = np.asarray(probs, dtype=float)
    if total_expected < 0:
        raise ValueError("total_expected must be nonnegative")
    if abs(probs.sum() - 1) > 1e-9:
        raise ValueError(f"probabilities sum to {probs.sum()!r}")
    rng = rng if rng is not None else make_rng(seed)
    means = total_expected * np.clip(probs, 0.0, None)
    counts = rng.poisson(means)
    if setting is None:
        setting = "Z" * (len(probs).bit_length() - 1)
    return CoincidenceRecord(setting, counts, float(total_expected))


def _parities(letters: str, setting: str) -> np.ndarray:
    """+-1 eigenvalue of the term for every outcome bitstring of ``setting``."""
    n = len(setting)
    mask = int("".join("0" if c == "I" else "1" for c in letters), 2)
    outcomes = np.arange(2**n)
    ones = np.array([bin(b & mask).count("1") for b in outcomes])
    return 1 - 2 * (ones % 2)


def _linear_estimate(record: CoincidenceRecord, terms: Sequence[PauliString]) -> tuple[float, float]:
    """Estimate sum_t c_t <t> from one record, with delta-method Poisson sigma."""
    n_total = record.total
    if n_total == 0:
        raise ValueError(f"no counts recorded in setting {record.setting}")
    for t in terms:
        if t.num_qubits != len(record.setting) or not _compatible(t.letters, record.setting):
            raise ValueError(f"term {t.letters} cannot be read from setting {record.setting}")
    g = sum(t.coefficient * _parities(t.letters, record.setting) for t in terms)
    counts = record.counts
    value = float(g @ counts) / n_total
    var = float(((g - value) ** 2) @ counts) / n_total**2
    return value, float(np.sqrt(max(var, 0.0)))


def estimate_pauli_term(record: CoincidenceRecord, term: PauliString | str, seed: int = 0) -> EstimationResult:
    if isinstance(term, str):
        term = PauliString(term)
    unit = PauliString(term.letters, 1.0)
    value, sigma = _linear_estimate(record, [unit])
    c = term.coefficient
    return EstimationResult(c * value, abs(c) * sigma, record.total_expected, seed, (record,))


def estimate_witness(
    rho,
    w: Witness,
    shots_per_setting: float,
    seed: int = 0,
    stream: Sequence[int] = (),
) -> EstimationResult:
    """Simulate every setting of ``w`` on ``rho`` and assemble the witness value.

    ``stream`` extends the RNG key, e.g. with a grid index, so that points of
    a sweep draw from independent streams.
    """
    if not shots_per_setting > 0:
        raise ValueError("shots_per_setting must be positive")
    settings = measurement_settings(w)
    groups = assign_terms(w, settings)
    value = w.identity_coefficient
    var = 0.0
    records = []
    for k, setting in enumerate(settings):
        probs = outcome_probabilities(rho, setting)
        record = sample_counts(probs, shots_per_setting, setting=setting,
                               rng=make_rng(seed, *stream, k))
        v, s = _linear_estimate(record, groups[setting])
        value += v
        var += s**2
        records.append(record)
    return EstimationResult(float(value), float(np.sqrt(var)), float(shots_per_setting), int(seed), tuple(records))


def lc_p_uncertainty(response_time: float, gate_duration: float) -> float:
    """Uncertainty on p = delta/T from the liquid-crystal switching time."""
    if gate_duration <= 0:
        raise ValueError("gate_duration must be positive")
    if response_time < 0 or response_time >= gate_duration:
        raise ValueError("need 0 <= response_time < gate_duration")
    return response_time / gate_duration

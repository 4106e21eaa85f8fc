"""Exit criteria for the package, one test per criterion, each at its pinned tolerance.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import numpy as np
import pytest

from channelscope.channels import DephasingParams, apply, cnot_unitary, depolarizing, noisy_cnot
from channelscope.choi import (
    ExperimentModelParams,
    channel_from_choi,
    choi_of_channel,
    cnot_choi_ket,
    experimental_werner_choi,
    is_entanglement_breaking,
    is_ppt,
    noisy_cnot_choi,
    two_qubit_anchor,
    werner_choi,
)
from channelscope.experiment import estimate_witness
from channelscope.operators import expectation
from channelscope.random_ops import random_channel, random_density, random_pure_state, random_separable_map
from channelscope.witnesses import (
    detection_threshold,
    mu_c_lower_bound,
    si_expectation,
    w_cnot,
    w_cnot_expectation_dephased,
    w_cnot_suboptimal,
    w_eb,
)

MEASURED = ExperimentModelParams(f0=0.935, nu_pi=0.858, eta_k=0.025)
IDEAL = ExperimentModelParams.ideal()
W_EB = w_eb().matrix
W_SUB = w_cnot_suboptimal().matrix
W_OPT = w_cnot().matrix


def dephased_choi(q1, q2):
    return choi_of_channel(noisy_cnot(DephasingParams(q1, q2))).state


def test_01_eb_witness_line(criterion):
    grid = np.linspace(0, 1, 21)
    dev = max(abs(expectation(W_EB, werner_choi(p).state) - (p - 0.5)) for p in grid)
    assert criterion("1  <W_EB> on Werner Choi = p - 1/2 (21 pts, 1e-12)", dev < 1e-12, f"max dev {dev:.1e}")


def test_02_eb_boundary(criterion):
    grid = np.round(np.linspace(0, 1, 1001), 12)
    wrong = [p for p in grid if p <= 0.499 and is_entanglement_breaking(depolarizing(p))]
    wrong += [p for p in grid if p >= 0.501 and not is_entanglement_breaking(depolarizing(p))]
    assert criterion("2a EB verdict false for p<=0.499, true for p>=0.501 (1001 pts)", not wrong,
                     f"{len(wrong)} misclassified")


def test_02_min_pt_eigenvalue_below_three_quarters(criterion):
    grid = np.linspace(0, 0.75, 751)
    dev = max(abs(is_ppt(choi_of_channel(depolarizing(p)).state, [1])[1] - (p - 0.5)) for p in grid)
    assert criterion("2b min PT eigenvalue = p - 1/2 on p in [0, 3/4] (1e-10)", dev < 1e-10, f"max dev {dev:.1e}")


@pytest.mark.xfail(strict=True, reason="for p > 3/4 the minimum PT eigenvalue is 1/2 - p/3, not p - 1/2")
def test_02_min_pt_eigenvalue_full_range_as_stated(criterion):
    grid = np.linspace(0, 1, 1001)
    devs = [abs(is_ppt(choi_of_channel(depolarizing(p)).state, [1])[1] - (p - 0.5)) for p in grid]
    dev = max(devs)
    first_bad = next((p for p, d in zip(grid, devs) if d >= 1e-10), None)
    criterion("2c min PT eigenvalue = p - 1/2 on full p in [0, 1] (1e-10) as literally stated", dev < 1e-10,
              f"fails from p={first_bad}; PT spectrum is {{p-1/2, 1/2-p/3 x3}}")
    assert dev < 1e-10


def test_03_mu_c_bound(criterion):
    exact = mu_c_lower_bound(-0.5) == 0.5
    trivial = all(mu_c_lower_bound(expectation(W_EB, werner_choi(p).state)) == 0
                  for p in np.linspace(0.5, 1, 51))
    trivial_exp = all(mu_c_lower_bound(expectation(W_EB, experimental_werner_choi(p, MEASURED.f0).state)) == 0
                      for p in np.linspace(0.5, 1, 51))
    assert criterion("3  mu_c bound: 0.5 at <W>=-1/2, 0 for all p>=0.5", exact and trivial and trivial_exp)


def test_04_cnot_diagonal_threshold(criterion):
    root = detection_threshold(lambda q: w_cnot_expectation_dephased(q, q), 0, 0.5).root
    dev = max(abs(expectation(W_SUB, dephased_choi(q, q)) - w_cnot_expectation_dephased(q, q))
              for q in np.linspace(0, 1, 11))
    ok = 0.165 <= root <= 0.175 and dev < 1e-10
    assert criterion("4  diagonal root in [0.165, 0.175]; closed form = brute force (1e-10)", ok,
                     f"root {root:.5f}, max dev {dev:.1e}")


def test_05_q2_thresholds(criterion):
    root = detection_threshold(lambda q: w_cnot_expectation_dephased(q, 0.0), 0, 0.5).root
    q1s = np.linspace(0, 1, 101)
    closed = min(w_cnot_expectation_dephased(q, 0.30) for q in q1s)
    brute = min(expectation(W_SUB, dephased_choi(q, 0.30)) for q in q1s)
    model = min(expectation(W_SUB, noisy_cnot_choi(q, 0.30, MEASURED)) for q in q1s)
    ok = 0.285 <= root <= 0.295 and min(closed, brute, model) > 0
    assert criterion("5  q2=0 root in [0.285, 0.295]; q2=0.30 never detected", ok,
                     f"root {root:.5f}, min <W> at q2=0.30: {min(closed, brute, model):.4f}")


def test_06_si_closed_form(criterion):
    dev = 0.0
    for q in np.linspace(0, 0.3, 7):
        for nu in (0.858, 1.0):
            for eta in (0.0, 0.025):
                p = ExperimentModelParams(nu_pi=nu, eta_k=eta)
                dev = max(dev, abs(si_expectation(q, p) - expectation(W_SUB, noisy_cnot_choi(q, q, p))))
    dev_ideal = max(abs(si_expectation(q, IDEAL) - w_cnot_expectation_dephased(q, q))
                    for q in np.linspace(0, 0.3, 7))
    ok = dev < 1e-10 and dev_ideal < 1e-12
    assert criterion("6  imperfect-source closed form = brute force (1e-10); ideal limit = diagonal (1e-12)", ok,
                     f"{dev:.1e}, {dev_ideal:.1e}")


def test_07_experimental_anchor_points(criterion):
    w0 = expectation(W_SUB, noisy_cnot_choi(0.0, 0.0, MEASURED))
    q_root = detection_threshold(lambda q: expectation(W_SUB, noisy_cnot_choi(q, q, MEASURED)), 0, 0.5).root
    w_eb0 = expectation(W_EB, experimental_werner_choi(0.0, MEASURED.f0).state)
    p_root = detection_threshold(
        lambda p: expectation(W_EB, experimental_werner_choi(p, MEASURED.f0).state), 0, 1).root
    ok = (abs(w0 + 0.625) <= 0.001 and 0.10 <= q_root <= 0.12
          and abs(w_eb0 + 0.435) <= 0.001 and abs(p_root - 0.476) <= 0.002)
    assert criterion("7  model anchors: <W~>(0)=-0.625, root in [0.10,0.12]; <W_EB>(0)=-0.435, root 0.476", ok,
                     f"{w0:.4f}, {q_root:.4f}, {w_eb0:.4f}, {p_root:.4f}")


def test_08_choi_structure(criterion):
    target = np.kron(cnot_unitary(), np.eye(4)) @ two_qubit_anchor()
    fidelity = abs(np.vdot(target, cnot_choi_ket())) ** 2
    rng = np.random.default_rng(8)
    dev = 0.0
    for _ in range(1000):
        ch = random_channel(1, rng)
        rho = random_density(2, rng)
        dev = max(dev, np.max(np.abs(channel_from_choi(choi_of_channel(ch), rho) - apply(ch, rho))))
    ok = fidelity > 1 - 1e-12 and dev < 1e-12
    assert criterion("8  |CNOT> = (U x I)|alpha> (F > 1-1e-12); Choi<->Kraus round trip 1e3 channels (1e-12)", ok,
                     f"1-F {1 - fidelity:.1e}, round trip {dev:.1e}")


def test_09_witness_validity(criterion):
    rng = np.random.default_rng(9)
    a = np.array([random_pure_state(2, rng) for _ in range(10_000)])
    b = np.array([random_pure_state(2, rng) for _ in range(10_000)])
    psi = np.einsum("ni,nj->nij", a, b).reshape(-1, 4)
    min_eb = np.einsum("ni,ij,nj->n", psi.conj(), W_EB, psi).real.min()
    min_opt = min_sub = np.inf
    for _ in range(1000):
        c = choi_of_channel(random_separable_map(rng)).state
        min_opt = min(min_opt, expectation(W_OPT, c))
        min_sub = min(min_sub, expectation(W_SUB, c))
    r_opt = detection_threshold(lambda q: expectation(W_OPT, dephased_choi(q, q)), 0, 0.5, 1e-8).root
    r_sub = detection_threshold(lambda q: expectation(W_SUB, dephased_choi(q, q)), 0, 0.5, 1e-8).root
    ok = min(min_eb, min_opt, min_sub) >= -1e-10 and abs(r_opt - r_sub) < 1e-3
    assert criterion("9  witnesses >= 0 on separable inputs; W and W~ diagonal roots agree (1e-3)", ok,
                     f"mins {min_eb:.2e}/{min_opt:.2e}/{min_sub:.2e}, roots {r_opt:.6f}/{r_sub:.6f}")


def test_10_statistical_estimator(criterion):
    shots, seeds = 1e6, range(200)
    cases = [(f"EB p={p}", werner_choi(p).state, w_eb(), p - 0.5) for p in (0.0, 0.25, 0.5)]
    cases += [(f"CNOT q={q}", dephased_choi(q, q), w_cnot_suboptimal(), w_cnot_expectation_dephased(q, q))
              for q in (0.0, 0.1)]
    problems = []
    for name, rho, wit, exact in cases:
        runs = [estimate_witness(rho, wit, shots, seed=s) for s in seeds]
        values = np.array([r.value for r in runs])
        sigmas = np.array([r.sigma for r in runs])
        if abs(runs[0].value - exact) > 5 * runs[0].sigma + 1e-12:
            problems.append(f"{name}: single run outside 5 sigma")
        if abs(values.mean() - exact) > 3 * sigmas.mean() / np.sqrt(len(values)) + 1e-12:
            problems.append(f"{name}: biased mean")
        emp, rep = values.std(ddof=1), sigmas.mean()
        if rep == 0:
            # pure, perfectly correlated input: no sampling noise at all
            if emp > 1e-12:
                problems.append(f"{name}: zero reported sigma but spread {emp:.1e}")
        elif not 0.7 <= emp / rep <= 1.3:
            problems.append(f"{name}: sigma ratio {emp / rep:.2f}")
    first = estimate_witness(werner_choi(0.25).state, w_eb(), shots, seed=77, stream=(1,))
    again = estimate_witness(werner_choi(0.25).state, w_eb(), shots, seed=77, stream=(1,))
    if repr((first.value, first.sigma)) != repr((again.value, again.sigma)):
        problems.append("rerun differs")
    assert criterion("10 estimator: 5 sigma accuracy, unbiased, sigma calibrated [0.7,1.3], reproducible",
                     not problems, "; ".join(problems))

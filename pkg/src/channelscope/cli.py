"""Command-line driver: witness sweeps, thresholds and a self test.

Exit codes: 0 ok, 1 self-test failure, 2 bad arguments, 3 I/O failure,
4 no root in the bracket.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .channels import DephasingParams, apply, depolarizing, noisy_cnot
from .choi import (
    ExperimentModelParams,
    channel_from_choi,
    choi_of_channel,
    experimental_werner_choi,
    noisy_cnot_choi,
    werner_choi,
)
from .experiment import estimate_witness, lc_p_uncertainty, make_rng
from .operators import expectation
from .random_ops import random_channel, random_density
from .witnesses import (
    NoSignChangeError,
    detection_threshold,
    mu_c_lower_bound,
    si_expectation,
    w_cnot_expectation_dephased,
    w_cnot_suboptimal,
    w_eb,
    w_eb_expectation_ideal,
    w_eb_expectation_model,
)

EXIT_OK, EXIT_SELFTEST, EXIT_ARGS, EXIT_IO, EXIT_NO_ROOT = 0, 1, 2, 3, 4
SEED_ENV = "CHANNELSCOPE_SEED"

EB_COLUMNS = ("p", "w_ideal", "w_model", "w_est", "w_err", "mu_c_bound", "p_err")
CNOT_COLUMNS = ("q1", "q2", "w_ideal_eq12", "w_model_si", "w_est", "w_err")


class UsageError(Exception):
    """Bad command-line input (exit code 2)."""


@dataclass
class SweepConfig:
    grid: list
    model: str = "ideal"
    model_params: ExperimentModelParams = field(default_factory=ExperimentModelParams)
    shots_per_setting: float | None = None
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        g = list(self.grid)
        if not g:
            raise UsageError("grid is empty")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise UsageError("grid must be strictly increasing")
        if g[0] < 0 or g[-1] > 1:
            raise UsageError(f"grid values must lie in [0, 1], got [{g[0]}, {g[-1]}]")
        if self.model not in ("ideal", "experimental"):
            raise UsageError(f"unknown model {self.model!r}")
        if self.shots_per_setting is not None and not self.shots_per_setting > 0:
            raise UsageError("--shots must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")

    @property
    def params(self) -> ExperimentModelParams:
        return self.model_params if self.model == "experimental" else ExperimentModelParams.ideal()

    def to_meta(self) -> dict:
        meta = asdict(self)
        meta["model_params"] = asdict(self.model_params)
        return meta


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive of hi up to rounding) or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise UsageError("grid step must be positive")
            n = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return [round(lo + i * step, 12) for i in range(max(n, 0))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; expected lo:hi:step or a comma list") from None


def _map(fn: Callable, items: list, jobs: int) -> list:
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cmd_detect_eb(cfg: SweepConfig, lc_response: float = 0.0, gate_duration: float = 1.0) -> list[dict]:
    """Rows of <W_EB> versus the depolarizing weight p."""
    p_err = lc_p_uncertainty(lc_response, gate_duration)
    wit = w_eb()
    f0 = cfg.params.f0

    def row(item):
        i, p = item
        w_model = w_eb_expectation_model(p, f0)
        w_est = w_err = None
        if cfg.shots_per_setting is not None:
            est = estimate_witness(experimental_werner_choi(p, f0).state, wit,
                                   cfg.shots_per_setting, cfg.seed, stream=(i,))
            w_est, w_err = est.value, est.sigma
        return {
            "p": p,
            "w_ideal": w_eb_expectation_ideal(p),
            "w_model": w_model,
            "w_est": w_est,
            "w_err": w_err,
            "mu_c_bound": mu_c_lower_bound(w_model),
            "p_err": p_err,
        }

    return _map(row, list(enumerate(cfg.grid)), cfg.jobs)


def cmd_detect_cnot(cfg: SweepConfig, q2: float | None = None) -> list[dict]:
    """Rows of <W_CNOT_sub> along q1 = q2 = q (``q2=None``) or along q1 at fixed q2."""
    wit = w_cnot_suboptimal()
    params = cfg.params
    if q2 is not None and not 0 <= q2 <= 1:
        raise UsageError(f"--q2 must lie in [0, 1], got {q2}")

    def row(item):
        i, q = item
        q1, q2_ = (q, q) if q2 is None else (q, q2)
        state = None
        if q2 is None:
            w_model = si_expectation(q, params)
        else:
            state = noisy_cnot_choi(q1, q2_, params)
            w_model = expectation(wit.matrix, state)
        w_est = w_err = None
        if cfg.shots_per_setting is not None:
            if state is None:
                state = noisy_cnot_choi(q1, q2_, params)
            est = estimate_witness(state, wit, cfg.shots_per_setting, cfg.seed, stream=(i,))
            w_est, w_err = est.value, est.sigma
        return {
            "q1": q1,
            "q2": q2_,
            "w_ideal_eq12": w_cnot_expectation_dephased(q1, q2_),
            "w_model_si": w_model,
            "w_est": w_est,
            "w_err": w_err,
        }

    return _map(row, list(enumerate(cfg.grid)), cfg.jobs)


THRESHOLD_TARGETS = ("eb", "cnot_diag", "cnot_q2", "si_model")


def cmd_threshold(target: str, params: ExperimentModelParams | None = None, q2: float = 0.0,
                  model: str = "ideal", tol: float = 1e-6):
    """Root of the detection curve for ``target``; raises NoSignChangeError if none."""
    params = params or ExperimentModelParams()
    if target == "eb":
        f0 = params.f0 if model == "experimental" else 1.0
        return detection_threshold(lambda p: w_eb_expectation_model(p, f0), 0.0, 1.0, tol)
    if target == "cnot_diag":
        return detection_threshold(lambda q: w_cnot_expectation_dephased(q, q), 0.0, 0.5, tol)
    if target == "cnot_q2":
        return detection_threshold(lambda q: w_cnot_expectation_dephased(q, q2), 0.0, 0.5, tol)
    if target == "si_model":
        return detection_threshold(lambda q: si_expectation(q, params), 0.0, 0.5, tol)
    raise UsageError(f"unknown threshold target {target!r}")


def selftest_checks() -> list[tuple[str, float, float]]:
    """(name, max deviation, tolerance) for each built-in consistency check."""
    wit = w_cnot_suboptimal()
    web = w_eb()
    checks = []

    grid = np.linspace(0, 1, 21)
    dev = max(abs(expectation(web.matrix, werner_choi(p).state) - (p - 0.5)) for p in grid)
    checks.append(("W_EB on Werner Choi state vs p - 1/2", dev, 1e-12))

    dev = max(np.max(np.abs(choi_of_channel(depolarizing(p)).state - werner_choi(p).state)) for p in grid)
    checks.append(("Choi of depolarizing channel vs closed form", dev, 1e-12))

    qs = np.linspace(0, 0.5, 11)
    dev = 0.0
    for q1 in qs:
        for q2 in (q1, 0.0, 0.3):
            brute = expectation(wit.matrix, choi_of_channel(noisy_cnot(DephasingParams(q1, q2))).state)
            dev = max(dev, abs(brute - w_cnot_expectation_dephased(q1, q2)))
    checks.append(("dephased CNOT closed form vs brute force", dev, 1e-10))

    dev = 0.0
    for q in np.linspace(0, 0.3, 7):
        for nu in (0.858, 1.0):
            for eta in (0.0, 0.025):
                p = ExperimentModelParams(nu_pi=nu, eta_k=eta)
                dev = max(dev, abs(expectation(wit.matrix, noisy_cnot_choi(q, q, p)) - si_expectation(q, p)))
    checks.append(("imperfect-source closed form vs brute force", dev, 1e-10))

    rng = make_rng(20240101)
    dev = 0.0
    for _ in range(100):
        ch = random_channel(1, rng)
        rho = random_density(2, rng)
        dev = max(dev, np.max(np.abs(channel_from_choi(choi_of_channel(ch), rho) - apply(ch, rho))))
    checks.append(("Choi <-> Kraus round trip (100 random channels)", dev, 1e-12))
    return checks


def cmd_selftest(out=None) -> int:
    out = out or sys.stdout
    failures = 0
    for name, dev, tol in selftest_checks():
        ok = dev < tol
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: max deviation {dev:.3e} (tol {tol:g})", file=out)
    print(f"{failures} failure(s)", file=out)
    return EXIT_OK if failures == 0 else EXIT_SELFTEST


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def render_dataset(rows: list[dict], columns: tuple, fmt: str, meta: dict) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(r[c]) for c in columns])
        return buf.getvalue()
    doc = {"meta": meta, "rows": [{c: r[c] for c in columns} for r in rows]}
    return json.dumps(doc, indent=2) + "\n"


def write_output(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--model", choices=("ideal", "experimental"), default="ideal")
    p.add_argument("--f0", type=float, default=0.935, help="source fidelity to |Phi+> (EB experiment)")
    p.add_argument("--nu-pi", type=float, default=0.858, help="polarization visibility (CNOT experiment)")
    p.add_argument("--eta-k", type=float, default=0.025, help="beam-splitter path dephasing")


def _add_sweep_flags(p: argparse.ArgumentParser):
    p.add_argument("--grid", default="0:1:0.05", help="lo:hi:step or comma list")
    _add_model_flags(p)
    p.add_argument("--shots", type=float, default=None,
                   help="expected coincidences per setting; omit for analytic columns only")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1, help="grid points evaluated in parallel")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="channelscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    eb = sub.add_parser("detect-eb", help="sweep <W_EB> over the depolarizing weight p")
    _add_sweep_flags(eb)
    eb.add_argument("--lc-response", type=float, default=0.0, help="LC response time in seconds")
    eb.add_argument("--gate-duration", type=float, default=1.0, help="detection gate duration in seconds")

    cn = sub.add_parser("detect-cnot", help="sweep <W_CNOT_sub> over the dephasing strength")
    _add_sweep_flags(cn)
    cn.add_argument("--mode", choices=("diagonal", "fixed_q2"), default="diagonal")
    cn.add_argument("--q2", type=float, default=0.0, help="dephasing after the gate in fixed_q2 mode")

    th = sub.add_parser("threshold", help="bisection root of a detection curve")
    th.add_argument("target", choices=THRESHOLD_TARGETS)
    _add_model_flags(th)
    th.add_argument("--q2", type=float, default=0.0)
    th.add_argument("--tol", type=float, default=1e-6)

    sub.add_parser("selftest", help="closed-form vs brute-force consistency checks")
    return parser


def _model_params(args) -> ExperimentModelParams:
    try:
        return ExperimentModelParams(f0=args.f0, nu_pi=args.nu_pi, eta_k=args.eta_k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "selftest":
            return cmd_selftest()

        if args.command == "threshold":
            res = cmd_threshold(args.target, _model_params(args), q2=args.q2, model=args.model, tol=args.tol)
            label = args.target + (f"(q2={args.q2:g})" if args.target == "cnot_q2" else "")
            print(f"{label}: root={res.root:.9f} bracket=[{res.bracket[0]:.9f}, {res.bracket[1]:.9f}] tol={res.tolerance:g}")
            return EXIT_OK

        cfg = SweepConfig(
            grid=parse_grid(args.grid),
            model=args.model,
            model_params=_model_params(args),
            shots_per_setting=args.shots,
            seed=_resolve_seed(args.seed),
            output_path=args.out,
            format=args.format,
            jobs=args.jobs,
        )
        if args.command == "detect-eb":
            rows = cmd_detect_eb(cfg, args.lc_response, args.gate_duration)
            columns, extra = EB_COLUMNS, {"lc_response": args.lc_response, "gate_duration": args.gate_duration}
        else:
            q2 = args.q2 if args.mode == "fixed_q2" else None
            rows = cmd_detect_cnot(cfg, q2)
            columns, extra = CNOT_COLUMNS, {"mode": args.mode, "q2": q2}
        meta = {"command": args.command, "version": __version__, "seed": cfg.seed, "config": cfg.to_meta(), **extra}
        text = render_dataset(rows, columns, cfg.format, meta)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except NoSignChangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS

    try:
        write_output(text, cfg.output_path)
    except OSError as exc:
        print(f"error: cannot write {cfg.output_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

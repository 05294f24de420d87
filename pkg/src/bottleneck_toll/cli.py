"""Command-line front end.

    bottleneck-toll analyze --scenario base.json --out results/
    bottleneck-toll tolls   --scenario base.json --out results/ --regime te2 --pbar 1.5
    bottleneck-toll verify  --scenario base.json --out results/
    bottleneck-toll sweep   --sweep-spec d_sweep.json --out results/

Exit status: 0 on success, 1 on invalid input, 2 when a verification check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic, oracle
from .analytic import DEFAULT_PBAR, REGIME_NAMES, TollRegime
from .equity import regime_equity
from .model import CaseLabel, Scenario, ScenarioError, classify_case, load_scenario
from .sweep import load_sweep_specs, run_sweep, write_sweep_csv
from .tables import write_csv

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2
DENSE_SAMPLES = 1000


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: Path | None = None
    out: Path = Path(".")
    regime: str = "all"
    pbar: float = DEFAULT_PBAR
    dt: float = 0.001
    tol: float = 0.02
    max_iters: int = 200000
    step_fraction: float = 0.05
    sweep_spec: Path | None = None
    dynamics: bool = False
    dynamics_dt: float = 0.01
    corrupt_profile: bool = False

    def regimes(self) -> list[TollRegime]:
        names = REGIME_NAMES if self.regime == "all" else (self.regime,)
        return [TollRegime(n, self.pbar) for n in names]


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not verification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, help="scenario JSON file")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--regime", choices=REGIME_NAMES + ("all",), default="all")
    common.add_argument("--pbar", type=float, default=DEFAULT_PBAR, help="TE2 escalator override (>= 1)")
    common.add_argument("--dt", type=float, default=0.001, help="oracle bin width")
    common.add_argument("--tol", type=float, default=0.02, help="equilibrium gap tolerance")
    common.add_argument("--max-iters", type=int, default=200000)
    common.add_argument("--step-fraction", type=float, default=0.05)

    p = _Parser(prog="bottleneck-toll", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analyze", parents=[common], help="cost breakdowns and equity measures")
    sub.add_parser("tolls", parents=[common], help="toll schedules as CSV")
    v = sub.add_parser("verify", parents=[common], help="check closed forms against the discrete oracle")
    v.add_argument("--dynamics", action="store_true", help="also run best-response dynamics")
    v.add_argument("--dynamics-dt", type=float, default=0.01)
    v.add_argument("--corrupt-profile", action="store_true", help="perturb profiles (negative control)")
    sw = sub.add_parser("sweep", parents=[common], help="one-at-a-time sensitivity sweeps")
    sw.add_argument("--sweep-spec", type=Path, required=True)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        scenario=ns.scenario,
        out=ns.out,
        regime=ns.regime,
        pbar=ns.pbar,
        dt=ns.dt,
        tol=ns.tol,
        max_iters=ns.max_iters,
        step_fraction=ns.step_fraction,
        sweep_spec=getattr(ns, "sweep_spec", None),
        dynamics=getattr(ns, "dynamics", False),
        dynamics_dt=getattr(ns, "dynamics_dt", 0.01),
        corrupt_profile=getattr(ns, "corrupt_profile", False),
    )


def _require_scenario(cfg: RunConfig) -> Scenario:
    if cfg.scenario is None:
        raise ScenarioError("scenario", f"{cfg.command} needs --scenario")
    return load_scenario(cfg.scenario)


def _check_config(cfg: RunConfig) -> None:
    if not cfg.pbar >= 1:
        raise ScenarioError("pbar>=1", f"--pbar must be at least 1, got {cfg.pbar}")
    if not cfg.dt > 0 or not cfg.dynamics_dt > 0:
        raise ScenarioError("dt>0", "bin widths must be positive")
    if not cfg.tol > 0:
        raise ScenarioError("tol>0", "--tol must be positive")
    if not 0 < cfg.step_fraction < 1:
        raise ScenarioError("step-fraction", "--step-fraction must lie in (0, 1)")
    if cfg.max_iters < 1:
        raise ScenarioError("max-iters", "--max-iters must be positive")


def _outdir(cfg: RunConfig) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg.out


# ---------------------------------------------------------------- commands


def cmd_analyze(cfg: RunConfig) -> int:
    s = _require_scenario(cfg)
    regimes = cfg.regimes()
    out = _outdir(cfg)
    cost_rows, equity_rows = [], []
    for x in regimes:
        c = analytic.closed_form_costs(s, x)
        for k in range(2):
            g = c.group(k)
            cost_rows.append((x.name, str(k + 1), g["SDC"], g["TTC"], g["TRC"], g["TC"]))
        t = c.totals
        cost_rows.append((x.name, "total", t["SDC"], t["TTC"], t["TRC"], t["TC"]))
        if x.tolled:
            r = regime_equity(s, x)
            equity_rows.append(
                (x.name, r.y[0], r.y[1], r.equity_gap, r.social_benefit, *r.savings, *r.tolls)
            )
    write_csv(out / "costs.csv", ("regime", "group", "SDC", "TTC", "TRC", "TC"), cost_rows)
    write_csv(
        out / "equity.csv",
        ("regime", "y1", "y2", "equity_gap", "social_benefit", "savings1", "savings2", "revenue1", "revenue2"),
        equity_rows,
    )
    return EXIT_OK


def cmd_tolls(cfg: RunConfig) -> int:
    s = _require_scenario(cfg)
    regimes = cfg.regimes()
    out = _outdir(cfg)
    times = analytic.no_toll_times(s)
    dense = np.linspace(times.t0 - 1.0, times.tf + 1.0, DENSE_SAMPLES)
    for x in regimes:
        sched = analytic.schedules(s, x)
        for k in range(2):
            curve = sched[k]
            rows = [(t, v, "breakpoint") for t, v in curve.points]
            rows += [(t, v, "sample") for t, v in zip(dense, curve(dense))]
            rows.sort(key=lambda r: (r[0], r[2]))
            write_csv(out / f"schedule_{x.name}_{k + 1}.csv", ("time", "toll", "kind"), rows)
    return EXIT_OK


def _check(name: str, passed: bool, measured, threshold, **extra) -> dict:
    return {"name": name, "passed": bool(passed), "measured": measured, "threshold": threshold, **extra}


def verify_checks(s: Scenario, cfg: RunConfig) -> list[dict]:
    checks = []
    regimes = cfg.regimes()
    grid = oracle.make_grid(s, cfg.dt)
    early = s.early_share
    for x in regimes:
        closed = analytic.profile(s, x)
        sched = analytic.schedules(s, x)
        p = oracle.discretize(closed, s, cfg.dt, grid)
        if cfg.corrupt_profile:
            p = oracle.corrupt(p, s)
        d = oracle.equilibrium_gap(p, sched, s)
        checks.append(_check(f"{x.name}:equilibrium_gap", d.ok(cfg.tol), d.global_gap, cfg.tol, undercut=d.max_undercut))
        for k in range(2):
            ef = d.early_fraction[k]
            checks.append(_check(f"{x.name}:early_fraction_{k + 1}", abs(ef - early) <= 0.02, ef, [early, 0.02]))
        if x.tolled:
            rev = oracle.numeric_revenue(p, sched)
            want = analytic.closed_form_costs(s, x).totals["TRC"]
            rel = abs(rev - want) / max(1.0, abs(want))
            checks.append(_check(f"{x.name}:revenue", rel < 0.01, rev, {"closed_form": want, "rel_tol": 0.01}))
        if x.name in ("te1", "te2"):
            for group in (None, 0, 1):
                r = oracle.lemma2_check(s, x, 10.0, group=group, dt=cfg.dt, tol=1e-3)
                label = "uniform" if group is None else f"unoccupied_{group + 1}"
                checks.append(_check(f"{x.name}:shift_{label}", r.passed, r.gap_delta, 1e-3))
    names = {x.name for x in regimes}
    if {"so", "te2"} <= names and classify_case(s) is CaseLabel.ORDER_REVERSED:
        rs = [
            oracle.numeric_revenue(oracle.discretize(analytic.profile(s, x), s, cfg.dt, grid), analytic.schedules(s, x))
            for x in (TollRegime("so"), TollRegime("te2", cfg.pbar))
        ]
        rel = abs(rs[1] - rs[0]) / max(1.0, abs(rs[0]))
        checks.append(_check("revenue_neutrality", rel < 0.01, rs, 0.01))
    if cfg.dynamics:
        checks.extend(_dynamics_checks(s, cfg, regimes))
    return checks


def _dynamics_checks(s: Scenario, cfg: RunConfig, regimes) -> list[dict]:
    out = []
    for x in regimes:
        closed = analytic.profile(s, x)
        sched = analytic.schedules(s, x)
        if x.name == "te2" and classify_case(s) is CaseLabel.ORDER_REVERSED:
            sched = oracle.tie_break(s, sched, closed, 1)
        res = oracle.best_response_dynamics(
            s, sched, dt=cfg.dynamics_dt, step_fraction=cfg.step_fraction, max_iters=cfg.max_iters, tol=cfg.tol
        )
        out.append(_check(f"{x.name}:dynamics_converged", res.converged, res.diagnostics.global_gap, cfg.tol,
                          iterations=res.iterations))
        for k in range(2):
            ef = res.diagnostics.early_fraction[k]
            out.append(_check(f"{x.name}:dynamics_early_fraction_{k + 1}", abs(ef - s.early_share) <= 0.02, ef,
                              [s.early_share, 0.02]))
    return out


def cmd_verify(cfg: RunConfig) -> int:
    s = _require_scenario(cfg)
    checks = verify_checks(s, cfg)
    ok = all(c["passed"] for c in checks)
    doc = {
        "scenario": s.to_dict(),
        "case": classify_case(s).value,
        "dt": cfg.dt,
        "tol": cfg.tol,
        "passed": ok,
        "checks": checks,
    }
    path = _outdir(cfg) / "verify.json"
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    for c in checks:
        if not c["passed"]:
            print(f"FAIL {c['name']}: measured {c['measured']}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_sweep(cfg: RunConfig) -> int:
    base = load_scenario(cfg.scenario) if cfg.scenario is not None else None
    specs = load_sweep_specs(cfg.sweep_spec, base)
    regimes = [x for x in cfg.regimes() if x.tolled]
    out = _outdir(cfg)
    seen: dict[str, int] = {}
    for spec in specs:
        n = seen.get(spec.variable, 0)
        seen[spec.variable] = n + 1
        name = f"sweep_{spec.variable}.csv" if n == 0 else f"sweep_{spec.variable}_{n + 1}.csv"
        write_sweep_csv(out / name, run_sweep(spec, regimes))
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "tolls": cmd_tolls, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    try:
        _check_config(cfg)
        return COMMANDS[cfg.command](cfg)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point: ``signcons {run,check,compare,list}``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bundled as _bundled
from .errors import DomainError, ScenarioError
from .export import emit_plots
from .graph import has_spanning_tree, min_positive_weight, spanning_tree_roots, window_unions
from .protocol import LINEAR, SATURATED, SIGN, ProtocolKind
from .scenario_io import CONSENSUS, ESTIMATION, OPTIMIZATION, Scenario, dump_scenario, load_scenario, run_scenario
from .simulator import finite_time_bound, lyapunov_scalar, simulate

OUT_ENV = "SIGNCONS_OUT"


def resolve_scenario(ref: str) -> Scenario:
    """A path to a scenario file, or the name of a bundled scenario."""
    path = Path(ref)
    if path.is_file():
        return load_scenario(path)
    if ref in _bundled.NAMES:
        return _bundled.load_bundled(ref)
    raise FileNotFoundError(f"scenario file not found and no bundled scenario named {ref!r}")


def _out_dir(arg: str | None, name: str) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get(OUT_ENV, "results")) / name


def _apply_overrides(s: Scenario, args) -> Scenario:
    return s.with_overrides(seed=args.seed, dt=args.dt, t_max=args.tmax)


def cmd_list(args) -> int:
    for s in _bundled.bundled_scenarios():
        print(f"{s.name:24s} {s.application:13s} {s.description}")
    return 0


def cmd_run(args) -> int:
    s = _apply_overrides(resolve_scenario(args.scenario), args)
    trace = run_scenario(s)
    out = _out_dir(args.out, s.name)
    written = emit_plots(trace, out, title=s.name)
    trace.write_events_csv(out / "events.csv")
    written.append(out / "events.csv")
    if trace.metrics:
        trace.write_metrics_csv(out / "metrics.csv")
        written.append(out / "metrics.csv")
    (out / "scenario.json").write_text(dump_scenario(s), encoding="utf-8")
    t_conv = trace.converged_at
    print(f"{s.name}: {len(trace)} samples, final V = {trace.lyapunov[-1]:.6g}")
    print("converged at t = %s" % (f"{t_conv:.6g}" if t_conv is not None else "never"))
    print(f"wrote {len(written) + 1} files to {out}")
    return 0


def _check_lines(s: Scenario, window: float | None) -> list[str]:
    lines = [f"scenario {s.name}: n={s.n}, protocol={s.protocol}, application={s.application}"]
    for tid, top in s.schedule.table.items():
        roots = spanning_tree_roots(top)
        status = f"spanning tree (roots {roots})" if roots else "no spanning tree"
        lines.append(f"  topology {tid}: {status}")

    window = window or s.union_window
    if s.application in (ESTIMATION, OPTIMIZATION):
        horizon = float(s.params.get("steps", s.params.get("iterations", 1)))
    else:
        horizon = s.sim.t_max
    horizon = max(horizon, window)
    unions = window_unions(s.schedule, window, horizon)
    good = sum(has_spanning_tree(u) for _, u in unions)
    if good == len(unions):
        verdict = "spanning tree in every window"
    elif good == 0:
        verdict = "no spanning tree in any window"
    else:
        verdict = f"spanning tree missing in {len(unions) - good} of {len(unions)} windows"
    lines.append(f"  union over {len(unions)} windows of {window:g}: {verdict}")

    x0 = s.initial_state()
    positive = [t for t in s.schedule.table.values() if not t.is_empty()]
    if x0.shape[1] == 1 and positive:
        w_min = min(min_positive_weight(t) for t in positive)
        spread = lyapunov_scalar(x0)
        lines.append(f"  initial spread {spread:.6g}, min positive weight {w_min:.6g}")
        lines.append(f"  finite-time bound range/(2 w_min) = {finite_time_bound(x0, w_min, 2):.6g}")
        lines.append(f"  one-sided bound range/w_min     = {finite_time_bound(x0, w_min, 1):.6g}")
    return lines


def cmd_check(args) -> int:
    s = resolve_scenario(args.scenario)
    print("\n".join(_check_lines(s, args.window)))
    return 0


def _parse_protocols(text: str, radius: float) -> list[ProtocolKind]:
    out = []
    for name in filter(None, (p.strip() for p in text.split(","))):
        if name == SATURATED:
            out.append(ProtocolKind.saturated(radius))
        elif name in (SIGN, LINEAR):
            out.append(ProtocolKind(name))
        else:
            raise DomainError(f"compare supports sign, linear and saturated, not {name!r}")
    if not out:
        raise DomainError("no protocols given")
    return out


def cmd_compare(args) -> int:
    s = _apply_overrides(resolve_scenario(args.scenario), args)
    if s.application != CONSENSUS or s.initial_state().shape[1] != 1:
        raise DomainError("compare needs a scalar consensus scenario")
    radius = args.radius if args.radius is not None else (s.protocol.radius or 0.1)
    x0 = s.initial_state()
    traces = {}
    for p in _parse_protocols(args.protocols, radius):
        traces[str(p)] = simulate(x0, s.schedule, p, s.sim)
    out = _out_dir(args.out, f"{s.name}_compare")
    emit_plots(traces, out, title=f"{s.name}: protocol comparison")
    for name, tr in traces.items():
        t_conv = tr.converged_at
        when = f"{t_conv:.6g}" if t_conv is not None else "never"
        print(f"{name:20s} converged at {when:>10s}   final V = {tr.lyapunov[-1]:.6g}")
    print(f"wrote overlay to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signcons", description="Single-bit consensus simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<name> or results/<name>)")
        p.add_argument("--seed", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--tmax", type=float)

    p = sub.add_parser("run", help="simulate a scenario and write CSVs and plot scripts")
    p.add_argument("scenario", help="scenario file or bundled name")
    overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="print connectivity and bound diagnostics")
    p.add_argument("scenario")
    p.add_argument("--window", type=float, help="union window (default: scenario window or one period)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare", help="run several protocols from one initial state")
    p.add_argument("scenario")
    p.add_argument("--protocols", default="sign,linear,saturated")
    p.add_argument("--radius", type=float, help="saturation radius (default 0.1)")
    overrides(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("list", help="list bundled scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, DomainError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

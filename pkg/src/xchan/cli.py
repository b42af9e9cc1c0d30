"""Command-line front end: every figure- or table-style result is a CSV.

Each output carries a header row plus a leading comment line recording the
package version, seed and full parameter set, so any file can be
regenerated bit-for-bit.  Exit codes: 0 success, 2 usage, 3 validation,
4 file I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys

import numpy as np

from . import __version__, capacity, dof, orbit, phy, scheduler
from .channel import FadingModel, MixValidationError, Topology, TopologyMix

DEFAULT_SEED = 20230 + 1  # fixed so runs are reproducible by default
EXIT_VALIDATION = 3
EXIT_IO = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, comment: str, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    data = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(data)
    else:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(data)
        except OSError as exc:
            raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _comment(args, extra: str = "") -> str:
    base = f"xchan v{__version__} seed={args.seed} cmd={args.command}"
    return f"{base} {extra}".rstrip()


def _load_mix(path) -> TopologyMix:
    try:
        return TopologyMix.load(path)
    except OSError as exc:
        raise CliError(f"cannot read mix file {path}: {exc}", EXIT_IO) from exc


def _model(args) -> FadingModel:
    return FadingModel.parse(args.model, rice_k=args.rice_k)


def _pgrid(spec: str) -> list[float]:
    try:
        grid = [float(v) for v in spec.split(",") if v.strip() != ""]
    except ValueError:
        raise CliError(f"malformed P grid {spec!r}") from None
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise CliError(f"P grid must be strictly increasing, got {spec!r}")
    return grid


# ---------------------------------------------------------------------------
# subcommands

def _cmd_dof(args) -> None:
    if args.gap_stats:
        rng = np.random.default_rng(args.seed)
        rows = []
        for budget in (float(b) for b in args.budgets.split(",")):
            mx, mean = dof.gap_statistics(budget, args.nmc, rng)
            rows.append([budget, mx, mean])
        _write_csv(args.out, _comment(args, f"nmc={args.nmc} budgets={args.budgets}"),
                   ["budget", "max_gap", "mean_gap"], rows)
        return
    if not args.mix:
        raise CliError("dof requires --mix or --gap-stats")
    rep = dof.report(_load_mix(args.mix))
    _write_csv(args.out, _comment(args, f"mix={args.mix}"),
               ["lower", "upper", "exact", "tdma", "co1_gain", "co2_gain"],
               [[rep.lower, rep.upper,
                 "" if rep.exact is None else rep.exact, rep.tdma,
                 "" if rep.co1_gain is None else rep.co1_gain,
                 "" if rep.co2_gain is None else rep.co2_gain]])


def _cmd_schedule(args) -> None:
    try:
        seq = scheduler.load_sequence(args.sequence)
    except OSError as exc:
        raise CliError(f"cannot read sequence file {args.sequence}: {exc}", EXIT_IO) from exc
    plan = scheduler.plan(seq)
    rep = scheduler.report(plan)
    rows = [[g.kind, ";".join(str(s) for s in g.slots), g.symbols] for g in plan.groups]
    _write_csv(args.out,
               _comment(args, f"sequence={args.sequence} slots={rep.slots} "
                              f"symbols={rep.symbols_delivered} "
                              f"empirical_dof={rep.empirical_dof!r}"),
               ["group_kind", "slots", "symbols"], rows)


def _cmd_rates(args) -> None:
    model = _model(args)
    rng = np.random.default_rng(args.seed)
    rows = []
    for p_db in _pgrid(args.pgrid):
        t = phy.estimate_rate_terms(model, 10.0 ** (p_db / 10.0), args.nmc, rng)
        rows.append([str(model), p_db, t.a, t.b, t.c, t.d, t.e, t.f,
                     *(t.se[k] for k in phy.TERM_NAMES)])
    _write_csv(args.out, _comment(args, f"model={model} nmc={args.nmc} pgrid={args.pgrid}"),
               ["model", "P_dB", "A", "B", "C", "D", "E", "F",
                "se_A", "se_B", "se_C", "se_D", "se_E", "se_F"], rows)


def _cmd_gap(args) -> None:
    mix = _load_mix(args.mix)
    model = _model(args)
    rng = np.random.default_rng(args.seed)
    rows = []
    for p_db in _pgrid(args.pgrid):
        terms = phy.estimate_rate_terms(model, 10.0 ** (p_db / 10.0), args.nmc, rng)
        rep = capacity.capacity_gap(mix, terms)
        rows.append([p_db, rep.r_sum, rep.u1, rep.u2, rep.u3, rep.gap, rep.sigma])
    _write_csv(args.out,
               _comment(args, f"mix={args.mix} model={model} nmc={args.nmc}"),
               ["P_dB", "R_sum", "U1", "U2", "U3", "gap", "sigma"], rows)


CO1_MIX = TopologyMix({Topology.Z1: 0.5, Topology.Z2: 0.5})
CO2_MIX = TopologyMix({Topology.Z2: 1 / 3, Topology.Z4: 1 / 3, Topology.F: 1 / 3})


def run_gain_curves(model: FadingModel, p_grid_db: list[float], n_mc: int,
                    seed: int) -> list[list]:
    """Ergodic-rate gain of the two coding opportunities over TDMA, per P.

    gain_co1 uses the all-pairs mix {z1: 1/2, z2: 1/2} (rate C/2); gain_co2
    the all-triples mix {z2, z4, f: 1/3 each} (rate D/3); TDMA achieves A.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for p_db in p_grid_db:
        t = phy.estimate_rate_terms(model, 10.0 ** (p_db / 10.0), n_mc, rng)
        g1 = capacity.achievable_sum_rate(CO1_MIX, t) / capacity.tdma_rate(t) - 1.0
        g2 = capacity.achievable_sum_rate(CO2_MIX, t) / capacity.tdma_rate(t) - 1.0
        s1 = t.se["c"] / (2 * t.a) + (t.c / (2 * t.a**2)) * t.se["a"]
        s2 = t.se["d"] / (3 * t.a) + (t.d / (3 * t.a**2)) * t.se["a"]
        rows.append([str(model), p_db, g1, g2, max(s1, s2)])
    return rows


def _cmd_gain_curves(args) -> None:
    model = _model(args)
    rows = run_gain_curves(model, _pgrid(args.pgrid), args.nmc, args.seed)
    _write_csv(args.out, _comment(args, f"model={model} nmc={args.nmc}"),
               ["model", "P_dB", "gain_co1", "gain_co2", "sigma"], rows)


def _scenario(args) -> orbit.Scenario:
    if args.scenario:
        try:
            return orbit.load_scenario(args.scenario)
        except OSError as exc:
            raise CliError(f"cannot read scenario {args.scenario}: {exc}", EXIT_IO) from exc
        except (TypeError, ValueError) as exc:
            raise CliError(f"malformed scenario {args.scenario}: {exc}") from exc
    return orbit.default_scenario(rover_separation_km=args.separation_km)


def _cmd_orbit(args) -> None:
    scenario = _scenario(args)
    trace = orbit.topology_trace(scenario)
    if args.trace_out:
        rows = [[t, *map(int, trace.links[k].reshape(-1))]
                for k, t in enumerate(trace.times)]
        header = ["t_s"] + [f"r{i+1}o{j+1}" for i in range(2) for j in range(4)]
        _write_csv(args.trace_out, _comment(args), header, rows)
    mixes = orbit.extract_mixes(trace)
    names = [a.value for a in Topology]
    rows = []
    for pair, (mix, steps) in sorted(mixes.items()):
        rows.append([f"o{pair[0]+1}-o{pair[1]+1}", steps,
                     *(mix[a] for a in Topology)])
    _write_csv(args.out, _comment(args), ["pair", "steps", *names], rows)


def _cmd_compare(args) -> None:
    scenario = _scenario(args)
    rng = np.random.default_rng(args.seed)
    rep = orbit.compare(scenario, rng)
    header = ["scope", "steps", "cat_dof", "tdma_dof", "dof_gain_percent",
              "cat_throughput_bps", "tdma_throughput_bps",
              "throughput_gain_percent", "three_plus_link_fraction"]
    rows = [["overall", rep.active_steps, rep.cat_dof, rep.tdma_dof,
             rep.dof_gain_percent, rep.cat_throughput_bps, rep.tdma_throughput_bps,
             rep.throughput_gain_percent, rep.three_plus_link_fraction]]
    bw = scenario.link.bandwidth_hz
    for o in rep.pairs:
        rows.append([f"o{o.pair[0]+1}-o{o.pair[1]+1}", o.steps,
                     o.cat_symbols / o.steps, o.baseline_symbols / o.steps,
                     100.0 * (o.cat_symbols - o.baseline_symbols) / o.baseline_symbols,
                     o.cat_rate_hz_s * bw / o.steps, o.tdma_rate_hz_s * bw / o.steps,
                     100.0 * (o.cat_rate_hz_s - o.tdma_rate_hz_s) / o.tdma_rate_hz_s,
                     ""])
    _write_csv(args.out, _comment(args), header, rows)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xchan",
        description="2x2 X-channel with time-varying topology: DoF, rates, "
                    "scheduling and the Mars rover-to-orbiter scenario.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=False, nmc_default=100_000):
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (default: fixed constant, or XCHAN_SEED)")
        p.add_argument("--out", default="-", help="output CSV path ('-' = stdout)")
        if model:
            p.add_argument("--model", choices=["uniform", "rayleigh", "rice"],
                           default="rayleigh")
            p.add_argument("--rice-k", type=float, default=1.0)
            p.add_argument("--pgrid", default="0,10,20,30",
                           help="comma-separated transmit powers in dB")
            p.add_argument("--nmc", type=int, default=nmc_default,
                           help="Monte Carlo samples per grid point")

    p = sub.add_parser("dof", help="sum-DoF report for a mix, or random gap statistics")
    p.add_argument("--mix", help="TOML file of topology fractions")
    p.add_argument("--gap-stats", action="store_true",
                   help="sample random z/f mixes and report bound gaps")
    p.add_argument("--budgets", default="0.2,0.5,0.8")
    p.add_argument("--nmc", type=int, default=10_000)
    common(p)
    p.set_defaults(func=_cmd_dof)

    p = sub.add_parser("schedule", help="group a topology sequence file into a plan")
    p.add_argument("--sequence", required=True, help="one topology name per line")
    common(p)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("rates", help="Monte Carlo rate terms A..F over a power grid")
    common(p, model=True)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("gap", help="achievable rate vs upper bounds for a mix")
    p.add_argument("--mix", required=True)
    common(p, model=True)
    p.set_defaults(func=_cmd_gap)

    p = sub.add_parser("gain-curves", help="coding-opportunity rate gains over TDMA")
    common(p, model=True)
    p.set_defaults(func=_cmd_gain_curves)

    for name, fn, help_ in (("orbit", _cmd_orbit, "LOS trace and per-pair mixes"),
                            ("compare", _cmd_compare, "CAT vs TDMA DoF/throughput gains")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--scenario", help="scenario TOML file")
        p.add_argument("--separation-km", type=float, default=600.0,
                       help="rover separation for the built-in scenario")
        if name == "orbit":
            p.add_argument("--trace-out", help="also write the per-step link trace CSV")
        common(p)
        p.set_defaults(func=fn)

    return parser


def _resolve_seed(args) -> None:
    if args.seed is None:
        env = os.environ.get("XCHAN_SEED")
        args.seed = int(env) if env else DEFAULT_SEED


def dispatch(argv=None) -> int:
    """Parse arguments and run a subcommand; returns the exit status."""
    args = build_parser().parse_args(argv)
    _resolve_seed(args)
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (MixValidationError, dof.SymmetryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

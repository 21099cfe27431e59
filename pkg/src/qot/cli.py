"""``qot`` command line.

Exit codes: 0 success, 2 bad input or invalid topology/method combination,
3 exact solver asked for more than the candidate cap, 4 a schedule that
does not cover its targets was used for reconstruction or metrics.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import logging
import sys
from pathlib import Path

import numpy as np

from . import baselines, io, solver
from .reconstruct import (
    ExpectationTable,
    UncoveredObservableError,
    UnverifiedScheduleError,
    assemble_rdm,
    concurrence,
    estimate_expectations,
    fidelity,
    one_shot_d,
    project_psd,
    sample_ratio,
)
from .sim import MeasurementRecord, apply_local_random, make_state, measure_setting, rdm_oracle
from .solver import CandidateCapError, Schedule, verify_cover
from .targets import expand_universe, parse_topology

log = logging.getLogger("qot")

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_UNCOVERED = 0, 2, 3, 4

METHOD_ALIASES = {
    "exact": "exact",
    "greedy": "greedy-density",
    "greedy-density": "greedy-density",
    "greedy-enum": "greedy-enum",
    "chain": "chain-periodic",
    "bipartite": "bipartite-coloring",
    "baseline-binary": "baseline-binary",
    "baseline-ternary": "baseline-ternary",
    "naive": "naive",
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _method(name: str) -> str:
    try:
        return METHOD_ALIASES[name]
    except KeyError:
        raise CliError(EXIT_INPUT, f"unknown method {name!r}") from None


def _spec(args):
    try:
        return parse_topology(args.topology, args.n)
    except (ValueError, OSError, KeyError) as exc:
        raise CliError(EXIT_INPUT, f"bad topology: {exc}") from exc


def _load_schedule(path) -> Schedule:
    data = io.read_json(path, "n", "method", "settings")
    try:
        return Schedule.from_json(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from exc


def _solve(spec, method, args):
    kw = {}
    if getattr(args, "time_limit", None) is not None:
        kw["time_limit"] = args.time_limit
    return solver.solve(spec, method, seed=args.seed, restarts=args.restarts, workers=args.workers, **kw)


def cmd_schedule(args) -> int:
    spec = _spec(args)
    method = _method(args.method)
    manifest = io.RunManifest("schedule", seed=args.seed)
    try:
        sched = _solve(spec, method, args)
    except CandidateCapError as exc:
        raise CliError(EXIT_CAP, str(exc)) from exc
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc
    io.write_json(args.out, sched.to_json())
    manifest.write(args.out)
    print(f"{len(sched)} settings  optimal={sched.optimal}  method={sched.method}  -> {args.out}")
    return EXIT_OK


def _parse_range(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition("..")
        out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    return out


def cmd_compare(args) -> int:
    methods = [m for m in (args.methods or "").split(",") if m]
    if not methods:
        raise CliError(EXIT_INPUT, "no methods given")
    methods = [_method(m) for m in methods]
    try:
        ns, ks = _parse_range(args.n), _parse_range(args.k)
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"bad range: {exc}") from exc
    manifest = io.RunManifest("compare", seed=args.seed)
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "k", "method", "settings", "optimal", "lower_bound"])
    from .targets import all_k_subsets

    for n in ns:
        for k in ks:
            if not 1 <= k <= n:
                continue
            spec = all_k_subsets(n, k)
            lb = solver.lower_bound(expand_universe(spec))
            for method in methods:
                if method.startswith("baseline") and k != 2:
                    log.info("skipping %s for k=%d", method, k)
                    continue
                if method == "naive":
                    writer.writerow([n, k, method, baselines.naive_count(spec), "not-applicable", lb])
                    continue
                try:
                    sched = _solve(spec, method, args)
                except CandidateCapError as exc:
                    raise CliError(EXIT_CAP, str(exc)) from exc
                except ValueError as exc:
                    raise CliError(EXIT_INPUT, str(exc)) from exc
                writer.writerow([n, k, method, len(sched), sched.optimal, lb])
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
        manifest.write(args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _state(args):
    try:
        st = make_state(args.state, args.n, args.state_file)
        if args.local_random_seed is not None:
            st = apply_local_random(st, args.local_random_seed)
        return st
    except (ValueError, OSError, KeyError) as exc:
        raise CliError(EXIT_INPUT, f"bad state: {exc}") from exc


def cmd_simulate(args) -> int:
    sched = _load_schedule(args.schedule)
    state = _state(args)
    if sched.n != state.n:
        raise CliError(EXIT_INPUT, f"schedule has n={sched.n}, state has n={state.n}")
    manifest = io.RunManifest("simulate", [args.schedule, args.state_file], args.seed)
    try:
        records = [
            measure_setting(state, g, args.mode, args.shots, args.seed + j)
            for j, g in enumerate(sched.settings)
        ]
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc
    io.write_json(args.out, {
        "n": state.n,
        "state": args.state,
        "target_hash": sched.target_hash,
        "records": [r.to_json() for r in records],
    })
    manifest.write(args.out)
    print(f"{len(records)} {args.mode} records -> {args.out}")
    return EXIT_OK


def _load_records(path) -> list[MeasurementRecord]:
    data = io.read_json(path, "records")
    try:
        return [MeasurementRecord.from_json(r) for r in data["records"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from exc


def _require_cover(sched, spec, label="schedule"):
    if sched.n != spec.n:
        raise CliError(EXIT_INPUT, f"{label} has n={sched.n}, targets have n={spec.n}")
    report = verify_cover(sched, expand_universe(spec))
    if not report.covered:
        raise CliError(
            EXIT_UNCOVERED,
            f"{label} leaves {len(report.uncovered_elements)} target observables unmeasured, "
            f"e.g. {report.uncovered_elements[0]}",
        )


def _table(records, sched, spec):
    try:
        return estimate_expectations(records, sched, spec)
    except UncoveredObservableError as exc:
        raise CliError(EXIT_UNCOVERED, str(exc)) from exc
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc


def cmd_reconstruct(args) -> int:
    spec = _spec(args)
    sched = _load_schedule(args.schedule)
    records = _load_records(args.records)
    _require_cover(sched, spec)
    manifest = io.RunManifest("reconstruct", [args.records, args.schedule])
    table = _table(records, sched, spec)
    rdms = []
    for s in spec.subsets:
        est = assemble_rdm(s, table)
        if args.project_psd:
            est = project_psd(est)
        rdms.append(est.to_json())
    io.write_json(args.out, {"n": spec.n, "rdms": rdms})
    manifest.write(args.out)
    if args.expectations_out:
        io.write_json(args.expectations_out, table.to_json())
        manifest.write(args.expectations_out)
    print(f"{len(rdms)} RDMs -> {args.out}")
    return EXIT_OK


def _psd(est):
    if np.linalg.eigvalsh(est.matrix).min() < -1e-10:
        return project_psd(est).matrix
    return est.matrix


def cmd_metrics(args) -> int:
    spec = _spec(args)
    sched = _load_schedule(args.schedule)
    _require_cover(sched, spec)
    manifest = io.RunManifest("metrics", [args.expectations, args.records, args.schedule, args.baseline])
    if args.expectations:
        data = io.read_json(args.expectations, "n", "observables")
        try:
            table = ExpectationTable.from_json(data)
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(EXIT_INPUT, f"{args.expectations}: {exc}") from exc
    elif args.records:
        table = _table(_load_records(args.records), sched, spec)
    else:
        raise CliError(EXIT_INPUT, "metrics needs --expectations or --records")
    state = _state(args) if args.state else None
    per_subset = []
    try:
        for s in spec.subsets:
            rho = _psd(assemble_rdm(s, table))
            per_subset.append({
                "subset": list(s),
                "d": one_shot_d(sched, table, s),
                "fidelity_vs_oracle": None if state is None else fidelity(rho, rdm_oracle(state, s)),
                "concurrence": concurrence(rho) if len(s) == 2 else None,
            })
    except KeyError as exc:
        raise CliError(EXIT_INPUT, f"expectation table incomplete: {exc}") from exc
    ds = [row["d"] for row in per_subset]
    report = {"per_subset": per_subset, "worst_d": max(ds), "mean_d": float(np.mean(ds))}
    if args.baseline:
        base = _load_schedule(args.baseline)
        _require_cover(base, spec, "baseline schedule")
        try:
            report["comparison"] = sample_ratio(base, sched, table, spec).to_json()
        except UnverifiedScheduleError as exc:
            raise CliError(EXIT_UNCOVERED, str(exc)) from exc
    io.write_json(args.out, report)
    manifest.write(args.out)
    msg = f"worst_d={report['worst_d']:.6g} mean_d={report['mean_d']:.6g}"
    if "comparison" in report:
        msg += f" worst_ratio={report['comparison']['worst_ratio']:.6g}"
    print(msg + f" -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qot", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def solver_flags(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--restarts", type=int, default=8)
        sp.add_argument("--time-limit", type=float, default=None, help="seconds for exact search (default 60)")
        sp.add_argument("--workers", type=int, default=1)

    def target_flags(sp):
        sp.add_argument("--n", type=int, default=None, help="number of qubits")
        sp.add_argument("--topology", required=True,
                        help="all:k | chain:k | lattice:RxC | custom:<path> | mixed:<path,path,...>")

    def state_flags(sp, required):
        sp.add_argument("--state", required=required, choices=["ghz", "w", "psi4", "zero", "custom"])
        sp.add_argument("--state-file", default=None, help="amplitude JSON for --state custom")
        sp.add_argument("--local-random-seed", type=int, default=None,
                        help="apply seeded Haar-random single-qubit unitaries")

    sp = sub.add_parser("schedule", help="compute a measurement schedule")
    target_flags(sp)
    sp.add_argument("--method", required=True, help=" | ".join(METHOD_ALIASES))
    solver_flags(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_schedule)

    sp = sub.add_parser("compare", help="setting counts of several methods on all-k targets")
    sp.add_argument("--n", required=True, help="e.g. 6..10 or 4,6")
    sp.add_argument("--k", required=True, help="e.g. 2..4")
    sp.add_argument("--methods", default="", help="comma-separated method names")
    solver_flags(sp)
    sp.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("simulate", help="measurement records for a schedule")
    sp.add_argument("--schedule", required=True)
    sp.add_argument("--n", type=int, required=True)
    state_flags(sp, True)
    sp.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    sp.add_argument("--shots", type=int, default=0, help="shots per setting (sampled mode)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("reconstruct", help="RDMs from measurement records")
    target_flags(sp)
    sp.add_argument("--records", required=True)
    sp.add_argument("--schedule", required=True)
    sp.add_argument("--project-psd", action="store_true")
    sp.add_argument("--expectations-out", default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("metrics", help="one-shot distances and scheme comparison")
    target_flags(sp)
    sp.add_argument("--schedule", required=True)
    sp.add_argument("--baseline", default=None, help="second schedule; ratio is baseline/schedule")
    sp.add_argument("--expectations", default=None)
    sp.add_argument("--records", default=None, help="records taken under --schedule")
    state_flags(sp, False)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except io.SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

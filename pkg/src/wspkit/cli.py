"""Command-line front end.

Subcommands: generate, solve, verify, encode, inspect, calibrate, bench.

File formats are JSON (instances, plans; schema-validated), OPB/DIMACS with a
variable-map sidecar (encoded models), and RFC-4180 CSV (bench results).  All
output files are byte-stable across runs: fixed field order, LF line endings,
ASCII.  Timing goes to stderr so stdout stays deterministic too.

Exit codes: solve uses the SAT-competition convention of 10 (satisfiable),
20 (unsatisfiable) and 30 (budget exhausted); verify exits 0 for a valid
plan and 2 for an invalid one; every command exits 1 on usage or IO errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import jsonschema

from .absorption import branching_bound
from .core import (
    ADA,
    AtLeast,
    AtMost,
    AuthorisationFunction,
    BoD,
    Constraint,
    Instance,
    SoD,
    SUAL,
    WL,
    WspError,
    violated_constraints,
)
from .encode import (
    emit_cs_json,
    emit_dimacs,
    emit_opb,
    emit_varmap,
    encode_cs,
    encode_pbpb,
    encode_udpb,
)
from .generator import (
    FAMILY_KINDS,
    GenSpec,
    derive_seed,
    family_spec,
    generate_with_meta,
)
from .patterns import bell
from .solver import (
    Budget,
    SolveResult,
    Verdict,
    solve_backtracking,
    solve_bruteforce,
    solve_pattern_enum,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_BUDGET = 30

VERDICT_EXIT = {Verdict.SAT: EXIT_SAT, Verdict.UNSAT: EXIT_UNSAT,
                Verdict.BUDGET: EXIT_BUDGET}


class CliError(WspError):
    """A user-facing command error: bad file, bad flag combination."""


# --- instance and plan files -----------------------------------------------------


def constraint_to_doc(c: Constraint) -> dict:
    if isinstance(c, (SoD, BoD)):
        return {"kind": type(c).__name__.lower(), "s1": c.s1, "s2": c.s2}
    if isinstance(c, (AtMost, AtLeast)):
        return {"kind": type(c).__name__.lower(), "r": c.r,
                "scope": list(c.scope)}
    if isinstance(c, SUAL):
        return {"kind": "sual", "scope": list(c.scope), "h": c.h,
                "supers": sorted(c.supers)}
    if isinstance(c, WL):
        return {"kind": "wl", "scope": list(c.scope),
                "teams": [sorted(team) for team in c.teams]}
    if isinstance(c, ADA):
        return {"kind": "ada", "s1": c.s1, "s2": c.s2,
                "trigger": sorted(c.trigger), "required": sorted(c.required)}
    raise CliError(f"no file form for constraint type {type(c).__name__}")


def constraint_from_doc(doc: dict) -> Constraint:
    kind = doc["kind"]
    if kind == "sod":
        return SoD(doc["s1"], doc["s2"])
    if kind == "bod":
        return BoD(doc["s1"], doc["s2"])
    if kind == "atmost":
        return AtMost(doc["r"], tuple(doc["scope"]))
    if kind == "atleast":
        return AtLeast(doc["r"], tuple(doc["scope"]))
    if kind == "sual":
        return SUAL(tuple(doc["scope"]), doc["h"], frozenset(doc["supers"]))
    if kind == "wl":
        return WL(tuple(doc["scope"]),
                  tuple(frozenset(team) for team in doc["teams"]))
    if kind == "ada":
        return ADA(doc["s1"], doc["s2"], frozenset(doc["trigger"]),
                   frozenset(doc["required"]))
    raise CliError(f"unknown constraint kind {kind!r}")


def instance_to_doc(inst: Instance, meta: Optional[dict] = None) -> dict:
    doc = {
        "k": inst.k,
        "n": inst.n,
        "auth": [list(inst.auth.users(s)) for s in range(inst.k)],
        "constraints": [constraint_to_doc(c) for c in inst.constraints],
    }
    if meta is not None:
        doc["meta"] = meta
    return doc


def instance_from_doc(doc: dict) -> Instance:
    auth = AuthorisationFunction.from_lists(doc["auth"], doc["n"])
    constraints = tuple(constraint_from_doc(c) for c in doc["constraints"])
    return Instance(doc["k"], doc["n"], auth, constraints)


@lru_cache(maxsize=None)
def _schema(name: str) -> dict:
    text = resources.files("wspkit.schemas").joinpath(name).read_text("ascii")
    return json.loads(text)


def _validated(doc, schema_name: str, path) -> dict:
    try:
        jsonschema.validate(doc, _schema(schema_name))
    except jsonschema.exceptions.ValidationError as exc:
        raise CliError(f"{path}: does not match the {schema_name.split('.')[0]} "
                       f"schema: {exc.message}") from exc
    return doc


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except ValueError as exc:
        raise CliError(f"{path}: not valid JSON: {exc}") from exc


def load_instance(path) -> Instance:
    doc = _validated(_read_json(path), "instance.schema.json", path)
    try:
        return instance_from_doc(doc)
    except WspError as exc:
        raise CliError(f"{path}: {exc}") from exc


def load_plan(path) -> tuple[int, ...]:
    doc = _validated(_read_json(path), "plan.schema.json", path)
    return tuple(doc["assignment"])


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def save_instance(path, inst: Instance, meta: Optional[dict] = None) -> None:
    Path(path).write_text(dump_json(instance_to_doc(inst, meta)),
                          encoding="ascii")


def save_plan(path, plan: Sequence[int]) -> None:
    Path(path).write_text(dump_json({"assignment": list(plan)}),
                          encoding="ascii")


# --- generate ----------------------------------------------------------------------


def _family_kind(name: str) -> str:
    label = name.lower()
    if label in ("wsp", "wsp_sod"):
        return "sod"
    if label.startswith("wsp_"):
        label = label[4:]
    if label in FAMILY_KINDS:
        return label
    raise CliError(f"unknown family {name!r}; use wsp or wsp_<kind> with "
                   f"kind one of {', '.join(FAMILY_KINDS)}")


def _family_label(kind: str) -> str:
    return "wsp" if kind == "sod" else f"wsp_{kind}"


def cmd_generate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    band = (args.band_lo, args.band_hi)
    if args.family is not None:
        if any((args.sod, args.am3, args.sual, args.wl, args.ada)):
            raise CliError("--family picks the constraint counts; "
                           "drop the per-kind count flags")
        kind = _family_kind(args.family)
        label = _family_label(kind)
        spec = family_spec(kind, args.k, args.n,
                           count_override=args.family_count,
                           samples=args.samples, band=band,
                           use_cache=not args.no_cache, jobs=args.jobs)
        for i in range(args.count):
            sub_seed = derive_seed(args.seed, i)
            inst, meta = generate_with_meta(replace(spec, seed=sub_seed))
            meta.update(family=label, master_seed=args.seed, index=i)
            path = out_dir / f"{label}-k{args.k}-n{args.n}-s{args.seed}-{i:03d}.json"
            save_instance(path, inst, meta)
            print(path)
        return EXIT_OK

    counts = {"sod": args.sod, "am3": args.am3, "sual": args.sual,
              "wl": args.wl, "ada": args.ada}
    for i in range(args.count):
        seed = args.seed + i
        spec = GenSpec(k=args.k, n=args.n, seed=seed, **counts)
        inst, meta = generate_with_meta(spec)
        meta["family"] = "explicit"
        parts = [f"k{args.k}", f"n{args.n}"]
        parts += [f"{kind}{count}" for kind, count in counts.items() if count]
        parts.append(f"s{seed}")
        path = out_dir / ("inst-" + "-".join(parts) + ".json")
        save_instance(path, inst, meta)
        print(path)
    return EXIT_OK


# --- solve and verify -----------------------------------------------------------------


def _budget_from(args) -> Optional[Budget]:
    if args.max_millis is None and args.max_patterns is None \
            and args.max_nodes is None:
        return None
    return Budget(max_millis=args.max_millis, max_patterns=args.max_patterns,
                  max_nodes=args.max_nodes)


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    budget = _budget_from(args)
    if args.algorithm == "backtrack":
        res: SolveResult = solve_backtracking(
            inst, budget, jobs=args.jobs, backend=args.kernel)
    elif args.algorithm == "pattern-enum":
        res = solve_pattern_enum(inst, budget)
    else:
        if budget is not None:
            raise CliError("bruteforce runs to completion; budgets apply to "
                           "backtrack and pattern-enum")
        res = solve_bruteforce(inst)
    print(f"verdict {res.verdict.value.upper()}")
    if res.plan is not None:
        print("plan " + " ".join(str(u) for u in res.plan))
        if args.plan_out:
            save_plan(args.plan_out, res.plan)
    stats = res.stats
    print(f"patterns_visited {stats.patterns_visited}")
    print(f"nodes_expanded {stats.nodes_expanded}")
    print(f"matchings_computed {stats.matchings_computed}")
    print(f"millis {stats.wall_time * 1000.0:.3f}", file=sys.stderr)
    return VERDICT_EXIT[res.verdict]


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    plan = load_plan(args.plan)
    if len(plan) != inst.k:
        raise CliError(f"{args.plan}: plan covers {len(plan)} steps, "
                       f"instance has {inst.k}")
    for s, u in enumerate(plan):
        if not (0 <= u < inst.n and inst.auth.allows(s, u)):
            print(f"invalid: step {s} assigned unauthorised user {u}")
            return EXIT_INVALID
    violated = violated_constraints(plan, inst)
    if violated:
        print(f"invalid: violates {violated[0]!r}")
        return EXIT_INVALID
    print("valid")
    return EXIT_OK


# --- encode ------------------------------------------------------------------------------


def cmd_encode(args) -> int:
    if (args.repr == "cs") != (args.format == "json"):
        raise CliError("the cs representation pairs with --format json only; "
                       "udpb and pbpb pair with opb or dimacs")
    inst = load_instance(args.instance)
    out = Path(args.out)
    if args.repr == "cs":
        model = encode_cs(inst)
    elif args.repr == "udpb":
        model = encode_udpb(inst)
    else:
        model = encode_pbpb(inst,
                            include_transitivity=not args.no_transitivity)
    with open(out, "w", encoding="ascii", newline="") as sink:
        if args.format == "opb":
            emit_opb(model, sink)
        elif args.format == "dimacs":
            emit_dimacs(model, sink)
        else:
            emit_cs_json(model, sink)
    varmap = out.with_name(out.name + ".varmap")
    with open(varmap, "w", encoding="ascii", newline="") as sink:
        emit_varmap(model, sink)
    print(out)
    print(varmap)
    return EXIT_OK


# --- inspect -------------------------------------------------------------------------------


def cmd_inspect(args) -> int:
    inst = load_instance(args.instance)
    non_ui = inst.nonui_constraints()
    reports = [branching_bound(c, inst.k, inst.n) for c in non_ui]
    product = 1
    for report in reports:
        product *= report.bound
    bell_k = bell(inst.k)
    work = bell_k * product
    if args.json:
        doc = {
            "k": inst.k,
            "n": inst.n,
            "constraints": len(inst.constraints),
            "ui": len(inst.ui_constraints()),
            "non_ui": len(non_ui),
            "bell_k": bell_k,
            "branching": [{"kind": r.kind, "bound": r.bound}
                          for r in reports],
            "branching_product": product,
            "work_bound": work,
        }
        sys.stdout.write(dump_json(doc))
        return EXIT_OK
    print(f"k {inst.k}")
    print(f"n {inst.n}")
    print(f"constraints {len(inst.constraints)}")
    print(f"ui {len(inst.ui_constraints())}")
    print(f"non_ui {len(non_ui)}")
    for report in reports:
        print(f"branching {report.kind} {report.bound}")
    print(f"bell_k {bell_k}")
    print(f"branching_product {product}")
    print(f"work_bound {work}")
    return EXIT_OK


# --- calibrate -------------------------------------------------------------------------------


def cmd_calibrate(args) -> int:
    kind = _family_kind(args.family)
    spec = family_spec(kind, args.k, args.n, samples=args.samples,
                       band=(args.band_lo, args.band_hi),
                       use_cache=not args.no_cache, jobs=args.jobs)
    print(f"family {_family_label(kind)}")
    print(f"k {args.k}")
    print(f"n {args.n}")
    for field, count in spec.counts().items():
        print(f"{field} {count}")
    return EXIT_OK


# --- bench -----------------------------------------------------------------------------------


BENCH_ALGORITHMS = ("backtrack", "pattern-enum", "bruteforce")


def _bench_solve(algorithm: str, inst: Instance, budget: Optional[Budget],
                 jobs: int, kernel: str) -> SolveResult:
    if algorithm == "backtrack":
        return solve_backtracking(inst, budget, jobs=jobs, backend=kernel)
    if algorithm == "pattern-enum":
        return solve_pattern_enum(inst, budget)
    return solve_bruteforce(inst)


def _lower_median(values):
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise CliError(f"{flag}: expected comma-separated integers, "
                       f"got {text!r}") from exc


def _bench_sizes(args) -> list[tuple[int, int]]:
    ks = _parse_int_list(args.k_list, "--k-list")
    if not ks:
        raise CliError("--k-list: no sizes given")
    if (args.n_list is None) == (args.n_mult is None):
        raise CliError("give exactly one of --n-list or --n-mult")
    if args.n_mult is not None:
        return [(k, k * args.n_mult) for k in ks]
    ns = _parse_int_list(args.n_list, "--n-list")
    if len(ks) == 1:
        return [(ks[0], n) for n in ns]
    if len(ns) == 1:
        return [(k, ns[0]) for k in ks]
    if len(ks) == len(ns):
        return list(zip(ks, ns))
    raise CliError("--k-list and --n-list lengths do not match")


def cmd_bench(args) -> int:
    kind = _family_kind(args.family)
    label = _family_label(kind)
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    for algorithm in algorithms:
        if algorithm not in BENCH_ALGORITHMS:
            raise CliError(f"unknown algorithm {algorithm!r}")
    sizes = _bench_sizes(args)
    budget = Budget(max_millis=args.max_millis) \
        if args.max_millis is not None else None

    rows = []
    groups: dict[tuple, list] = {}
    for k, n in sizes:
        spec = family_spec(kind, k, n, samples=args.samples,
                           band=(args.band_lo, args.band_hi),
                           use_cache=not args.no_cache, jobs=args.jobs)
        for i in range(args.seeds):
            sub_seed = derive_seed(args.seed, i)
            inst, _ = generate_with_meta(replace(spec, seed=sub_seed))
            for algorithm in algorithms:
                res = _bench_solve(algorithm, inst, budget, args.jobs,
                                   args.kernel)
                millis = res.stats.wall_time * 1000.0
                rows.append([k, n, label, sub_seed, algorithm,
                             res.verdict.value, f"{millis:.3f}",
                             res.stats.patterns_visited,
                             res.stats.nodes_expanded])
                groups.setdefault((k, n, algorithm), []).append(
                    (millis, res.stats.patterns_visited,
                     res.stats.nodes_expanded))

    summaries = []
    for (k, n, algorithm), samples in groups.items():
        summaries.append([
            k, n, label, "median", algorithm, "",
            f"{_lower_median([s[0] for s in samples]):.3f}",
            _lower_median([s[1] for s in samples]),
            _lower_median([s[2] for s in samples]),
        ])

    sink = open(args.out, "w", encoding="ascii", newline="") \
        if args.out else sys.stdout
    try:
        writer = csv.writer(sink)
        writer.writerow(["k", "n", "family", "seed", "algorithm", "verdict",
                         "millis", "patterns_visited", "nodes_expanded"])
        writer.writerows(rows)
        writer.writerows(summaries)
    finally:
        if sink is not sys.stdout:
            sink.close()
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit 1, matching the documented
    exit-code contract (argparse defaults to 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_band_flags(parser) -> None:
    parser.add_argument("--samples", type=int, default=40,
                        help="instances per calibration probe")
    parser.add_argument("--band-lo", type=float, default=0.4)
    parser.add_argument("--band-hi", type=float, default=0.6)
    parser.add_argument("--no-cache", action="store_true",
                        help="ignore and do not write the calibration cache")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wspkit",
                     description="Workflow satisfiability toolkit")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("generate", help="draw pseudo-random instances")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    for kind in FAMILY_KINDS:
        p.add_argument(f"--{kind}", type=int, default=0,
                       help=f"number of {kind} constraints")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1,
                   help="number of instances to write")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--family", default=None,
                   help="calibrated family (wsp or wsp_<kind>) instead of "
                        "explicit counts")
    p.add_argument("--family-count", type=int, default=None,
                   help="override the family's calibrated own-kind count")
    p.add_argument("--jobs", type=int, default=1)
    _add_band_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--algorithm",
                   choices=("backtrack", "pattern-enum", "bruteforce"),
                   default="backtrack")
    p.add_argument("--max-millis", type=float, default=None)
    p.add_argument("--max-patterns", type=int, default=None)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--kernel", choices=("auto", "compiled", "pure"),
                   default="auto")
    p.add_argument("--plan-out", default=None,
                   help="write the satisfying plan to this JSON file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a plan against an instance")
    p.add_argument("instance")
    p.add_argument("plan")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("encode", help="write a solver-ready model file")
    p.add_argument("instance")
    p.add_argument("--repr", choices=("udpb", "pbpb", "cs"), required=True)
    p.add_argument("--format", choices=("opb", "dimacs", "json"),
                   required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-transitivity", action="store_true",
                   help="drop the redundant pairwise-equality transitivity "
                        "rows (pbpb only)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("inspect", help="report search-effort bounds")
    p.add_argument("instance")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("calibrate",
                       help="find and cache a family's constraint counts")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", default="wsp")
    p.add_argument("--jobs", type=int, default=1)
    _add_band_flags(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="time solvers over calibrated families")
    p.add_argument("--family", default="wsp")
    p.add_argument("--k-list", required=True,
                   help="comma-separated step counts")
    p.add_argument("--n-list", default=None,
                   help="comma-separated user counts")
    p.add_argument("--n-mult", type=int, default=None,
                   help="set n = mult * k instead of --n-list")
    p.add_argument("--seeds", type=int, default=5,
                   help="instances per size")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--algorithms", default="backtrack",
                   help="comma-separated: backtrack, pattern-enum, bruteforce")
    p.add_argument("--max-millis", type=float, default=None,
                   help="per-instance budget")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--kernel", choices=("auto", "compiled", "pure"),
                   default="auto")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    _add_band_flags(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except WspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

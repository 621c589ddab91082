"""Command-line entry point.

Exit codes: 0 yes / success, 1 no / infeasible, 2 undecided or refused by a
resource cap, 3 usage or input error, 4 internal invariant breach.
"""

import argparse
import csv
import io as _io
import os
import sys
from typing import List, Optional

from kvisits import densitylab, hardness, oracle, posmatch
from kvisits.core import (
    InstanceError,
    KVisitsInstance,
    OneOrTwoInstance,
    at_most_sqrt2_minus_half,
    density,
    verify_k_visits,
    verify_one_or_two,
    verify_two_visits,
)
from kvisits.discretize import clusters, complement_targets, discretized_sequence
from kvisits.generate import KINDS, SEEDED, generate
from kvisits.io import (
    InputError,
    dumps,
    instance_to_json,
    load_instance,
    load_schedule,
    schedule_to_json,
)
from kvisits.kernels import MODULUS

EXIT_YES, EXIT_NO, EXIT_UNDECIDED, EXIT_USAGE, EXIT_BREACH = 0, 1, 2, 3, 4

SCHEMA = """\
instance files (JSON):
  {"variant": "kvisits", "k": 3, "deadlines": [2, 5, 6]}
  {"variant": "2v", "deadlines": [2, 2]}
  {"variant": "one_or_two", "single": [1], "double": [2]}
  {"variant": "pm", "deadlines": [2, 2], "targets": [3, 4]}
  {"variant": "nmts", "a": [1, 2], "b": [1, 3], "t": [2, 5]}
  {"variant": "srnmts" | "in3dm", "a": [...], "t": [...]}
schedule files (JSON):
  {"entries": [{"pos": 1, "task": 1, "role": "primary"}, ...]}
  roles: single | primary | secondary | plain; tasks are 1-based in sorted
  deadline order (for one_or_two: singles first, then doubles)

environment: KVISITS_BRUTE_CAP, KVISITS_STATE_CAP, KVISITS_P_CAP override the
default caps; KVISITS_DISABLE_NUMBA=1 forces the numpy kernels.
"""

STAGES = ("nmts", "srnmts", "in3dm", "shifted", "pm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"environment variable {name} must be an integer, got {raw!r}")


def _emit(args, text: str):
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need_seed(args, why):
    if args.seed is None:
        raise UsageError(f"--seed is required for {why}")


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    inst = load_instance(args.inp)
    if args.algo == "randomized":
        _need_seed(args, "--algo randomized")
    seed = 0 if args.seed is None else args.seed
    kw = dict(brute_cap=args.brute_cap, p_cap=args.p_cap, seed=seed, trials=args.trials)
    report = {"variant": args.variant, "algo": args.algo, "seed": seed, "trials": args.trials, "modulus": MODULUS}
    sched = None
    if args.variant == "2v":
        if not isinstance(inst, KVisitsInstance) or inst.k != 2:
            raise InputError(f"{args.inp}: variant 2v needs a kvisits/2v instance with k = 2")
        res, sched = posmatch.solve_two_visits(inst.deadlines, strategy=args.algo, **kw)
        if sched is not None and not verify_two_visits(inst.deadlines, sched):
            raise posmatch.InvariantBreach("emitted schedule fails verification")
    elif args.variant == "1or2":
        if not isinstance(inst, OneOrTwoInstance):
            raise InputError(f"{args.inp}: variant 1or2 needs a one_or_two instance")
        res, sched = posmatch.solve_one_or_two(inst, strategy=args.algo, **kw)
        if sched is not None and not verify_one_or_two(inst, sched):
            raise posmatch.InvariantBreach("emitted schedule fails verification")
    else:
        if not isinstance(inst, posmatch.PMInstance):
            raise InputError(f"{args.inp}: variant pm needs a pm instance")
        res = posmatch.solve_auto(inst, strategy=args.algo, **kw)
    report["status"] = res.status
    report["clusters"] = list(res.clusters)
    if res.matching is not None:
        report["certificate"] = [
            {"d": x.d, "a": x.a, "t": x.t} for x in sorted(res.matching.triplets, key=lambda x: x.a)
        ]
    if sched is not None:
        report["schedule"] = schedule_to_json(sched)
        if args.emit_schedule:
            with open(args.emit_schedule, "w") as fh:
                fh.write(dumps(schedule_to_json(sched)))
    _emit(args, dumps(report))
    return {
        posmatch.FEASIBLE: EXIT_YES,
        posmatch.INFEASIBLE: EXIT_NO,
        posmatch.PROBABLY_INFEASIBLE: EXIT_NO,
        posmatch.UNDECIDED: EXIT_UNDECIDED,
    }[res.status]


def cmd_verify(args) -> int:
    inst = load_instance(args.inp)
    sched = load_schedule(args.schedule)
    want = OneOrTwoInstance if args.variant == "1or2" else KVisitsInstance
    if not isinstance(inst, want):
        raise InputError(f"{args.inp}: variant {args.variant} needs a {want.__name__} file")
    if args.variant == "kvisits":
        verdict = verify_k_visits(inst, sched)
    elif args.variant == "2v":
        verdict = verify_two_visits(inst.deadlines, sched)
    elif args.variant == "1or2":
        verdict = verify_one_or_two(inst, sched)
    else:
        verdict = densitylab.verify_pinwheel_window(inst.deadlines, sched)
    out = {"feasible": verdict.feasible}
    if verdict.witness is not None:
        w = verdict.witness
        out["witness"] = {"task": w.task, "position": w.position, "reason": w.reason}
    _emit(args, dumps(out))
    return EXIT_YES if verdict else EXIT_NO


def cmd_discretize(args) -> int:
    inst = load_instance(args.inp)
    d = inst.deadlines if hasattr(inst, "deadlines") else inst.double_deadlines
    seq = discretized_sequence(d)
    horizon = args.horizon or (inst.horizon if hasattr(inst, "horizon") else 2 * len(d))
    out = {
        "deadlines": list(d),
        "A": list(seq),
        "fits": seq.fits,
        "clusters": [
            {"start_index": c.start_index, "end_index": c.end_index, "start_value": c.start_value,
             "end_value": c.end_value}
            for c in clusters(seq)
        ],
        "horizon": horizon,
    }
    if seq.fits and (not len(seq) or seq[-1] <= horizon):
        out["T"] = list(complement_targets(seq, horizon))
    _emit(args, dumps(out))
    return EXIT_YES


def cmd_reduce(args) -> int:
    src, _, dst = args.chain.partition(":")
    if src not in STAGES or dst not in STAGES or STAGES.index(src) > STAGES.index(dst):
        raise UsageError(f"--chain must be FROM:TO with stages in order {' -> '.join(STAGES)}")
    inst = load_instance(args.inp)
    expect = {"nmts": hardness.NMTSInstance, "srnmts": hardness.SRNMTSInstance,
              "in3dm": hardness.IN3DMInstance, "shifted": hardness.IN3DMInstance, "pm": posmatch.PMInstance}[src]
    if not isinstance(inst, expect):
        raise InputError(f"{args.inp}: chain starts at {src} but the file holds {type(inst).__name__}")
    steps = [(src, inst)]
    cur = inst
    fns = {"srnmts": hardness.nmts_to_srnmts, "in3dm": hardness.srnmts_to_in3dm,
           "shifted": hardness.in3dm_normalize, "pm": hardness.in3dm_to_pm}
    for stage in STAGES[STAGES.index(src) + 1:STAGES.index(dst) + 1]:
        if cur is not hardness.TRIVIAL_NO:
            cur = fns[stage](cur)
        steps.append((stage, cur))
    if args.out_file:
        with open(args.out_file, "w") as fh:
            fh.write(dumps(instance_to_json(cur)))
    if not args.verify_with_oracle:
        sys.stdout.write(dumps(instance_to_json(cur)))
        return EXIT_YES
    verdicts = []
    lines = [f"{'step':<10} {'size':>6}  verdict"]
    for stage, obj in steps:
        if obj is hardness.TRIVIAL_NO:
            v, size = False, "-"
        elif stage == "pm":
            v, size = posmatch.solve_exact_search(obj) is not None, obj.n
        else:
            fn = {"nmts": hardness.solve_nmts_bf, "srnmts": hardness.solve_srnmts_bf}.get(stage, hardness.solve_in3dm_bf)
            v, size = bool(fn(obj, cap=args.oracle_cap)), obj.n
        verdicts.append(v)
        lines.append(f"{stage:<10} {size!s:>6}  {'yes' if v else 'no'}{'  (trivial no)' if obj is hardness.TRIVIAL_NO else ''}")
    agree = len(set(verdicts)) == 1
    lines.append("all steps agree" if agree else "MISMATCH between steps")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_YES if agree else EXIT_BREACH


def cmd_oracle(args) -> int:
    if args.oracle_cmd == "decide":
        inst = load_instance(args.inp)
        if not isinstance(inst, KVisitsInstance):
            raise InputError(f"{args.inp}: oracle decide needs a kvisits instance")
        cons = oracle.SearchConstraints(
            distinct_positions=frozenset(discretized_sequence(inst.deadlines))
            if args.constraint == "distinct-discretized" else frozenset(),
            sorted_first_visits=args.constraint == "sorted-first-visits",
        )
        res = oracle.k_visits_decide(inst, cons, state_cap=args.state_cap)
        out = {"feasible": res.feasible, "constraint": args.constraint, "states": res.states}
        if res.witness is not None:
            out["schedule"] = list(res.witness.tasks)
        _emit(args, dumps(out))
        return EXIT_YES if res else EXIT_NO
    if args.oracle_cmd == "counterexample-3v":
        rep = oracle.counterexample_3visits(state_cap=args.state_cap)
        out = {
            "instance": list(oracle.COUNTEREXAMPLE_DEADLINES),
            "k": oracle.COUNTEREXAMPLE_K,
            "fact1_schedule_verifies": rep.schedule_verifies,
            "fact2_distinct_discretized_infeasible": rep.distinct_discretized_infeasible,
            "fact3_sorted_first_visits_infeasible": rep.sorted_first_visits_infeasible,
            "states": list(rep.states),
        }
        _emit(args, dumps(out))
        if not rep.ok:
            raise posmatch.InvariantBreach("counterexample facts do not hold")
        return EXIT_YES
    _need_seed(args, "oracle sweep")
    rep = oracle.pm_equiv_sweep(args.count, args.max_n, args.seed)
    _emit(args, dumps({"checked": rep.checked, "yes": rep.yes, "mismatches": [list(m) for m in rep.mismatches]}))
    if not rep.ok:
        raise posmatch.InvariantBreach(f"{len(rep.mismatches)} mismatches between oracle and reduction")
    return EXIT_YES


def cmd_density(args) -> int:
    if args.check:
        inst = load_instance(args.check)
        d = inst.deadlines
        q = density(d)
        out = {"deadlines": list(d), "density": str(q), "density_float": float(q),
               "below_sqrt2_minus_half": at_most_sqrt2_minus_half(q)}
        kept = posmatch.normalize_fixpoint(d, 2)
        try:
            rep = densitylab.claim_property(kept)
        except Exception as exc:  # overfull instances have no discretized sequence
            out["claim"] = {"error": str(exc)}
            _emit(args, dumps(out))
            return EXIT_NO
        out["claim"] = {"ok": rep.ok, "first_violation": rep.first_violation,
                        "records": [r.__dict__ for r in rep.records]}
        if rep.ok:
            out["schedule"] = schedule_to_json(densitylab.density_schedule_2v(kept))
        _emit(args, dumps(out))
        return EXIT_YES if rep.ok else EXIT_NO
    _need_seed(args, "density --sweep")
    rows = densitylab.density_sweep(args.count, args.max_n, args.seed, args.threshold)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance_hash", "n", "density", "claim_ok", "scheduled_ok"])
    for r in rows:
        w.writerow([r.instance_hash, r.n, str(r.density), int(r.claim_ok), int(r.scheduled_ok)])
    _emit(args, buf.getvalue())
    ok = args.threshold != "sqrt2half" or all(r.claim_ok and r.scheduled_ok for r in rows)
    return EXIT_YES if ok else EXIT_BREACH


def _parse_params(text: Optional[str]) -> dict:
    out = {}
    for part in filter(None, (text or "").split(",")):
        key, eq, val = part.partition("=")
        if not eq:
            raise UsageError(f"--params expects key=value pairs, got {part!r}")
        out[key.strip()] = val.strip()
    return out


def cmd_family(args) -> int:
    p = _parse_params(args.params)
    try:
        if args.kind == "worstcase":
            j, dj = int(p["j"]), int(p["dj"])
            d = densitylab.worst_case_family(j, dj)
            rep = densitylab.claim_property(d)
            out = {"deadlines": list(d), "density": str(density(d)),
                   "formula_density": str(densitylab.worst_case_density(j, dj)),
                   "claim_first_violation": rep.first_violation}
            _emit(args, dumps(out))
            return EXIT_YES if rep.first_violation == j else EXIT_BREACH
        if args.kind == "pinwheelno":
            inst, expected = densitylab.pinwheel_no_family(int(p["x"]))
            res = oracle.k_visits_decide(inst, state_cap=args.state_cap)
            out = {"deadlines": list(inst.deadlines), "k": inst.k, "density": str(density(inst.deadlines)),
                   "expected": expected, "oracle": "yes" if res else "no"}
            _emit(args, dumps(out))
            return EXIT_YES if not res else EXIT_BREACH
        inst, sched = densitylab.divergent_family(int(p["k"]), int(p["n"]))
        ok = bool(verify_k_visits(inst, sched))
        out = {"deadlines": list(inst.deadlines), "k": inst.k, "density": str(density(inst.deadlines)),
               "schedule": list(sched.tasks), "verifies": ok}
        _emit(args, dumps(out))
        return EXIT_YES if ok else EXIT_BREACH
    except KeyError as exc:
        raise UsageError(f"--params is missing {exc.args[0]!r} for kind {args.kind}")


def cmd_generate(args) -> int:
    if args.kind in SEEDED:
        _need_seed(args, f"generate {args.kind}")
    params = {k: v for k, v in (("n", args.n), ("k", args.k), ("j", args.j), ("dj", args.dj), ("x", args.x),
                                ("max_n", args.max_n), ("max_value", args.max_value),
                                ("threshold", args.threshold)) if v is not None}
    try:
        obj = generate(args.kind, params, args.seed or 0)
    except KeyError as exc:
        raise UsageError(f"generate {args.kind} needs --{exc.args[0]}")
    _emit(args, dumps(obj))
    return EXIT_YES


def cmd_bench(args) -> int:
    from kvisits.bench import run_benchmarks

    _emit(args, dumps(run_benchmarks(repeat=args.repeat, quick=args.quick)))
    return EXIT_YES


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kvisits", description="Finite pinwheel scheduling toolkit.", epilog=SCHEMA,
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(p, out=True):
        if out:
            p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=None, help="master seed (64-bit integer)")

    brute_cap = _env_int("KVISITS_BRUTE_CAP", posmatch.DEFAULT_BRUTE_CAP)
    p_cap = _env_int("KVISITS_P_CAP", posmatch.DEFAULT_P_CAP)
    state_cap = _env_int("KVISITS_STATE_CAP", oracle.DEFAULT_STATE_CAP)

    p = sub.add_parser("solve", help="decide 2-Visits, (1 or 2)-Visits or Position Matching")
    p.add_argument("--variant", choices=("2v", "1or2", "pm"), required=True)
    p.add_argument("--algo", choices=("auto", "simple", "brute", "randomized", "exact"), default="auto")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--emit-schedule")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--brute-cap", type=int, default=brute_cap)
    p.add_argument("--p-cap", type=int, default=p_cap)
    common(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("verify", help="check a schedule against an instance")
    p.add_argument("--variant", choices=("kvisits", "2v", "1or2", "pinwheel"), required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--schedule", required=True)
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("discretize", help="discretized sequence, clusters and targets")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--horizon", type=int)
    common(p)
    p.set_defaults(fn=cmd_discretize)

    p = sub.add_parser("reduce", help="run the numerical-matching reduction chain")
    p.add_argument("--chain", default="nmts:pm", help="FROM:TO over " + ",".join(STAGES))
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", dest="out_file")
    p.add_argument("--verify-with-oracle", action="store_true")
    p.add_argument("--oracle-cap", type=int, default=hardness.DEFAULT_ORACLE_CAP)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("oracle", help="exact state-space k-Visits search")
    osub = p.add_subparsers(dest="oracle_cmd", required=True, parser_class=_Parser)
    q = osub.add_parser("decide")
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--constraint", choices=("distinct-discretized", "sorted-first-visits"))
    q.add_argument("--state-cap", type=int, default=state_cap)
    common(q)
    q = osub.add_parser("counterexample-3v")
    q.add_argument("--state-cap", type=int, default=state_cap)
    common(q)
    q = osub.add_parser("sweep")
    q.add_argument("--count", type=int, default=500)
    q.add_argument("--max-n", type=int, default=5)
    common(q)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("density", help="density checks and threshold sweeps")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--check", metavar="FILE")
    g.add_argument("--sweep", action="store_true")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--max-n", type=int, default=40)
    p.add_argument("--threshold", choices=("sqrt2half", "one"), default="sqrt2half")
    common(p)
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser("family", help="instantiate and check a witness family")
    p.add_argument("--kind", choices=("worstcase", "pinwheelno", "divergent"), required=True)
    p.add_argument("--params", help="comma-separated key=value, e.g. j=2,dj=4 | x=2 | k=2,n=3")
    p.add_argument("--state-cap", type=int, default=state_cap)
    common(p)
    p.set_defaults(fn=cmd_family)

    p = sub.add_parser("generate", help="write a seeded or family instance")
    p.add_argument("kind", choices=KINDS)
    for name in ("n", "k", "j", "dj", "x", "max-n", "max-value"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--threshold", choices=("sqrt2half", "one"))
    common(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("bench", help="time the numba and numpy kernels")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--quick", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, InputError, InstanceError) as exc:
        print(f"kvisits: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except posmatch.CapExceeded as exc:
        print(f"kvisits: refused: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (posmatch.InvariantBreach, AssertionError) as exc:
        print(f"kvisits: internal invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``qrecur <subcommand> [options]``.

Records go to ``--out``, else to ``$QRECUR_OUTPUT_DIR/<subcommand>.<format>``
when that variable is set, else to stdout. Human-readable summaries go to
stderr. Exit status is 0 on success, 1 when a requested verification
failed, 2 on usage or hard errors.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import algorithms as alg
from . import oracles
from .algorithms.results import dumps, envelope
from .dynamics import (
    CAT_MATRIX,
    PRINTED,
    SIGN_CONVENTIONS,
    LatticeMapSpec,
    UnimodularMatrix2,
    cat_map,
    sawtooth_map,
    standard_map,
)
from .qsim import Circuit, write_netlist
from .qsim.costs import qft_cost

OUTPUT_DIR_ENV = "QRECUR_OUTPUT_DIR"
EXIT_OK, EXIT_VERIFY, EXIT_ERROR = 0, 1, 2


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def parse_range(text: str) -> list[int]:
    """``"7"``, ``"2..12"`` (inclusive) or ``"2,3,5"``."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v]


def parse_point(text: str) -> tuple[int, int]:
    x, y = text.split(",")
    return int(x), int(y)


def row_seed(master: int, row: int) -> int:
    """Independent per-row seed derived from the master seed and row index."""
    return int(np.random.SeedSequence([master, row]).generate_state(1)[0])


def build_spec(args) -> LatticeMapSpec:
    if args.map == "cat":
        return cat_map(args.n)
    if args.map == "standard":
        return standard_map(args.K, args.n, args.sign_convention)
    return sawtooth_map(args.K, args.n, args.sign_convention)


def _iterations(text: str):
    return "auto" if text == "auto" else int(text)


def invocation(args) -> dict:
    skip = {"func", "out", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _csv(rows: list[dict]) -> str:
    return oracles.rows_to_csv(rows)


def emit(args, record: dict, rows: list[dict] | None = None) -> None:
    record.setdefault("invocation", invocation(args))
    text = dumps(record) if args.format == "json" else _csv(rows if rows is not None else [record])
    out = args.out
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{args.format}"
    if out is None:
        sys.stdout.write(text)
    else:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def say(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_alpha(args) -> int:
    gs = parse_range(args.g)
    if any(g < 2 for g in gs):
        raise UsageError("modulus must be at least 2")
    methods = ("bruteforce", "composite", "percival") if args.cross_check else (args.method,)

    def run(g):
        row = {"g": g}
        found = {}
        for m in methods:
            t0 = time.perf_counter()
            try:
                found[m] = oracles.alpha(CAT_MATRIX, g, m).alpha
            except (oracles.PercivalError, oracles.FactorizationError, ValueError) as exc:
                found[m] = None
                row.setdefault("errors", {})[m] = str(exc)
            row.setdefault("wall_time", 0.0)
            row["wall_time"] += time.perf_counter() - t0
        vals = {v for v in found.values() if v is not None}
        row["alpha"] = found[methods[0]] if found[methods[0]] is not None else next(iter(vals), None)
        row["method"] = "+".join(methods)
        row["mismatch"] = len(vals) > 1
        return row

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        rows = list(pool.map(run, gs))
    mismatches = sum(r["mismatch"] for r in rows)
    record = envelope("alpha", {"config": {"g": gs, "methods": list(methods)}, "rows": rows, "mismatches": mismatches})
    csv_rows = [{k: r.get(k) for k in ("g", "alpha", "method", "wall_time")} for r in rows]
    emit(args, record, csv_rows)
    say(f"alpha: {len(rows)} moduli, {mismatches} mismatches")
    return EXIT_VERIFY if mismatches else EXIT_OK


def _matrix(args) -> UnimodularMatrix2:
    return UnimodularMatrix2.identity() if args.identity else CAT_MATRIX


def cmd_qalpha(args) -> int:
    gs = parse_range(args.g)
    if any(g < 2 for g in gs):
        raise UsageError("modulus must be at least 2")
    single = len(gs) == 1

    def run(item):
        row, g = item
        seed = args.seed if single else row_seed(args.seed, row)
        return alg.q_lattice_period(_matrix(args), g, args.p, args.backend, args.shots, seed)

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(run, enumerate(gs)))
    for r in results:
        top = sorted(r.outcomes.items(), key=lambda kv: -kv[1])[:6]
        say(
            f"g={r.target['g']} p={r.p}: period={r.period} verified={r.verified} "
            f"elementary={r.gate_counts['elementary']} top outcomes={top}"
        )
    records = [r.to_record() for r in results]
    record = records[0] if single else envelope("period-sweep", {"rows": records})
    rows = [
        {
            "g": r.target["g"], "p": r.p, "period": r.period, "verified": r.verified,
            "shots": r.shots, "seed": r.seed, "elementary": r.gate_counts["elementary"],
        }
        for r in results
    ]
    emit(args, record, rows)
    return EXIT_OK if all(r.verified for r in results) else EXIT_VERIFY


def cmd_period(args) -> int:
    spec = build_spec(args)
    pt = parse_point(args.point)
    t_max = args.t or 3 * spec.modulus
    t0 = time.perf_counter()
    r = oracles.point_period_bruteforce(spec, pt, t_max)
    rec = envelope(
        "point-period",
        {"spec": spec.config(), "point": list(pt), "t_max": t_max, "period": r, "verified": r is not None},
        time.perf_counter() - t0,
    )
    emit(args, rec, [{"X": pt[0], "Y": pt[1], "period": r}])
    say(f"period of {pt}: {r}")
    return EXIT_OK if r is not None else EXIT_VERIFY


def cmd_qperiod(args) -> int:
    spec = build_spec(args)
    pt = parse_point(args.point)
    r = alg.q_point_period(spec, pt, args.p, args.backend, args.shots, args.seed)
    say(f"point {pt}: period={r.period} verified={r.verified}")
    emit(args, r.to_record(), [{"X": pt[0], "Y": pt[1], "p": r.p, "period": r.period, "verified": r.verified}])
    return EXIT_OK if r.verified else EXIT_VERIFY


def _search_rows(res) -> list[dict]:
    return [
        {"X": f["point"][0], "Y": f["point"][1], "count": f["count"], "verified": f["verified"],
         "minimal_period": f.get("minimal_period")}
        for f in res.found
    ]


def _report_search(args, res) -> int:
    pc = res.gate_counts["per_iteration"]
    say(
        f"{res.search}: k={res.k} hits={res.hits}/{res.shots} exact_success={res.exact_success:.6f} "
        f"predicted={res.predicted_success} M_estimate={res.M_estimate} "
        f"width={res.gate_counts['width']} per-iteration elementary={pc['elementary']}"
    )
    say("found: " + ", ".join(f"{tuple(f['point'])}x{f['count']}" for f in res.found))
    emit(args, res.to_record(), _search_rows(res))
    return EXIT_OK if res.verified and res.flags.get("ancilla_clean", True) else EXIT_VERIFY


def _classical(args, result) -> int:
    rec = envelope("enumeration", result.to_record())
    emit(args, rec, [result.to_record()])
    say(f"M={result.M}")
    return EXIT_OK


def cmd_returns(args) -> int:
    spec = build_spec(args)
    domain = oracles.Domain.parse(args.domain)
    if args.classical:
        return _classical(args, oracles.enumerate_returns(spec, domain, args.t))
    res = alg.grover_return_search(
        spec, domain, args.t, _iterations(args.k), args.shots, args.seed, args.backend,
        count=args.count, c=args.c, explicit=args.explicit_gates,
    )
    return _report_search(args, res)


def cmd_periodic(args) -> int:
    spec = build_spec(args)
    if args.classical:
        return _classical(args, oracles.enumerate_periodic(spec, args.t, args.line))
    res = alg.grover_periodic_search(
        spec, args.t, _iterations(args.k), args.shots, args.seed, args.backend,
        line=args.line, count=args.count, c=args.c,
    )
    return _report_search(args, res)


def cmd_count(args) -> int:
    spec = build_spec(args)
    cond = {"kind": args.condition, "t": args.t}
    if args.condition == "returns":
        cond["domain"] = args.domain
    else:
        cond["line"] = args.line
    r = alg.quantum_count(spec, cond, args.c, args.seed, args.shots, args.backend)
    say(f"S={r.S} c={r.c} index={r.observed_index} M~{r.M_estimate:.3f} interval={r.interval}")
    emit(args, r.to_record(), [{"S": r.S, "c": r.c, "index": r.observed_index, "M_estimate": r.M_estimate,
                                "lo": r.interval[0], "hi": r.interval[1]}])
    return EXIT_OK


def bench_tables(nq_range, qft_range) -> dict:
    alpha_rows = []
    for nq in nq_range:
        g = (1 << nq) - 1 if nq > 1 else 2
        p = alg.default_time_width(g)
        st = alg.lattice_period_gate_count(g, p)
        alpha_rows.append({"table": "alpha", "n_q": nq, "g": g, "p": p,
                           "elementary": st["elementary"], "total": st["total"]})
    exponent = None
    if len(alpha_rows) >= 2:
        x = np.log([r["n_q"] for r in alpha_rows])
        y = np.log([r["elementary"] for r in alpha_rows])
        exponent = float(np.polyfit(x, y, 1)[0])
    qft_rows = []
    for w in qft_range:
        c = Circuit(_qft_layout(w)).qft("r").stats()
        qft_rows.append({"table": "qft", "width": w, "elementary": c.elementary,
                         "formula": qft_cost(w), "exact": c.elementary == qft_cost(w)})
    saw = sawtooth_map("1/2", 8)
    problem = alg.return_problem(saw, oracles.Domain(4), 1)
    it = problem.iteration().stats()
    saw_row = {"table": "sawtooth", "N": 8, "K": "1/2", "domain": "4x4@0,0", "t": 1,
               "width": problem.layout.width, "per_iteration_elementary": it.elementary,
               "per_iteration_ops": it.total}
    return {"alpha": alpha_rows, "alpha_exponent": exponent, "qft": qft_rows, "sawtooth": saw_row}


def _qft_layout(w):
    from .qsim import RegisterLayout

    return RegisterLayout([("r", w)])


def cmd_bench(args) -> int:
    tables = bench_tables(parse_range(args.range), parse_range(args.qft_range))
    rec = envelope("bench", tables)
    rows = tables["alpha"] + tables["qft"] + ([tables["sawtooth"]] if tables["alpha"] else [])
    emit(args, rec, rows)
    say(f"alpha exponent: {tables['alpha_exponent']}; sawtooth per iteration: "
        f"{tables['sawtooth']['per_iteration_elementary']} on {tables['sawtooth']['width']} qubits")
    ok = all(r["exact"] for r in tables["qft"])
    return EXIT_OK if ok else EXIT_VERIFY


def build_circuit(args) -> Circuit:
    a = args.algorithm
    if a == "qalpha":
        g = int(args.g)
        p = args.p or alg.default_time_width(g)
        return alg.lattice_period_circuit(_matrix(args), g, p)
    spec = build_spec(args)
    if a == "qperiod":
        return alg.point_period_circuit(spec, parse_point(args.point), args.p or alg.default_time_width(spec.modulus))
    if a in ("returns", "periodic"):
        if a == "returns":
            problem = alg.return_problem(spec, oracles.Domain.parse(args.domain), args.t,
                                         explicit=args.explicit_gates)
        else:
            problem = alg.periodic_problem(spec, args.t, args.line)
        k = 1 if args.k == "auto" else int(args.k)
        it = problem.iteration()
        circ = Circuit(problem.layout, problem.prepare_ops(),
                       meta={"algorithm": a, "condition": problem.description, "k": k,
                             "per_iteration_elementary": it.stats().elementary})
        for _ in range(k):
            circ.append(it)
        return circ
    if a == "count":
        cond_extra = [("C", args.c)]
        if args.condition == "returns":
            problem = alg.return_problem(spec, oracles.Domain.parse(args.domain), args.t, cond_extra)
        else:
            problem = alg.periodic_problem(spec, args.t, args.line, cond_extra)
        from .algorithms.counting import counting_circuit

        return counting_circuit(problem)
    raise UsageError(f"unknown algorithm {a!r}")


def cmd_emit_circuit(args) -> int:
    circ = build_circuit(args)
    out = args.out
    if out is None:
        base = os.environ.get(OUTPUT_DIR_ENV)
        if not base:
            raise UsageError("--out is required when $QRECUR_OUTPUT_DIR is unset")
        out = Path(base) / f"{args.algorithm}.netlist"
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_netlist(circ, out)
    st = circ.stats()
    say(f"wrote {out}: {len(circ)} ops, {st.elementary} elementary gates on {circ.layout.width} qubits")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--shots", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=("dense", "compressed", "auto"), default="auto")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
    p.add_argument("--workers", type=int, default=1, help="parallel workers for sweeps")


def _map_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", choices=("cat", "standard", "sawtooth"), default="cat")
    p.add_argument("--n", type=int, default=8, help="lattice size N")
    p.add_argument("--K", default="1", help="kick strength num/den")
    p.add_argument("--sign-convention", choices=SIGN_CONVENTIONS, default=PRINTED)


def _search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--k", default="auto", help="Grover iterations or 'auto'")
    p.add_argument("--c", type=int, default=5, help="counting register width")
    p.add_argument("--count", action="store_true", help="estimate M by quantum counting first")
    p.add_argument("--classical", action="store_true", help="emit the exact classical enumeration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrecur", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alpha", help="classical lattice period over a range of moduli")
    p.add_argument("--g", required=True, help="modulus, range a..b or list")
    p.add_argument("--method", choices=("bruteforce", "percival", "composite"), default="bruteforce")
    p.add_argument("--cross-check", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("qalpha", help="quantum lattice period")
    p.add_argument("--g", required=True)
    p.add_argument("--p", type=int, default=None, help="time register width")
    p.add_argument("--identity", action="store_true", help="use the identity matrix")
    _common(p)
    p.set_defaults(func=cmd_qalpha)

    p = sub.add_parser("period", help="classical period of one point")
    _map_args(p)
    p.add_argument("--point", required=True, help="X,Y")
    p.add_argument("--t", type=int, default=None, help="largest period to try")
    _common(p)
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("qperiod", help="quantum period of one point (cat/affine maps)")
    _map_args(p)
    p.add_argument("--point", required=True)
    p.add_argument("--p", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_qperiod)

    p = sub.add_parser("returns", help="Grover search for returning trajectories")
    _map_args(p)
    p.add_argument("--domain", default="4x4", help="PxP or PxP@X,Y")
    p.add_argument("--explicit-gates", action="store_true", help="emit map steps as explicit gates")
    _search_args(p)
    _common(p)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("periodic", help="Grover search for periodic points")
    _map_args(p)
    p.add_argument("--line", default=None, help="symmetry line id, e.g. I1:Y=0")
    _search_args(p)
    _common(p)
    p.set_defaults(func=cmd_periodic)

    p = sub.add_parser("count", help="quantum counting of marked points")
    _map_args(p)
    p.add_argument("--condition", choices=("returns", "periodic"), default="returns")
    p.add_argument("--domain", default="4x4")
    p.add_argument("--line", default=None)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--c", type=int, default=5)
    _common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bench", help="gate-count scaling tables")
    p.add_argument("--range", default="2..6", help="n_q range for lattice-period circuits")
    p.add_argument("--qft-range", default="2..10")
    _common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("emit-circuit", help="write a circuit netlist")
    p.add_argument("--algorithm", required=True, choices=("qalpha", "qperiod", "returns", "periodic", "count"))
    p.add_argument("--g", default="2")
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--identity", action="store_true")
    p.add_argument("--point", default="1,0")
    p.add_argument("--domain", default="4x4")
    p.add_argument("--line", default=None)
    p.add_argument("--condition", choices=("returns", "periodic"), default="returns")
    p.add_argument("--explicit-gates", action="store_true")
    _map_args(p)
    _search_args(p)
    _common(p)
    p.set_defaults(func=cmd_emit_circuit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, RuntimeError) as exc:
        say(f"qrecur {args.command}: error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

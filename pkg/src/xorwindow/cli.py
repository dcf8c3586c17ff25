"""Command-line front door.

Exit codes: 0 success, 2 usage/IO/validation error; `solve` additionally
exits 1 for UNSAT.  Stdout is byte-identical across invocations of the
same build with the same flags and seed.  Every randomized subcommand
demands an explicit --seed; there is no wall-clock default.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import experiments, gf2, theory, validate
from .instance import decode, encode, generate, m_from_r
from .peel import peel_run


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_instance(path: Optional[str]):
    if path is None or path == "-":
        return decode(sys.stdin.read())
    with open(path, "r", encoding="utf-8") as fh:
        return decode(fh.read())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok)


def _fmt9(x: float) -> str:
    return format(float(x), ".9g")


def _cmd_theory(args) -> int:
    c = theory.constants(args.k)
    if args.json:
        text = json.dumps(c.as_dict(), indent=2) + "\n"
    else:
        d = c.as_dict()
        width = max(len(k) for k in d)
        lines = []
        for key, val in d.items():
            if isinstance(val, list):
                val = "[" + ", ".join(_fmt9(v) for v in val) + "]"
            elif isinstance(val, float):
                val = _fmt9(val)
            lines.append(f"{key:<{width}}  {val}")
        text = "\n".join(lines) + "\n"
    _write(text, args.out)
    return 0


def _cmd_gen(args) -> int:
    if args.m is not None:
        m = args.m
    else:
        m = m_from_r(args.k, args.n, args.r, theory.thresholds(args.k).rho_k)
    inst = generate(args.k, m, args.n, args.seed)
    _write(encode(inst), args.out)
    return 0


def _cmd_solve(args) -> int:
    inst = _read_instance(getattr(args, "in"))
    system = gf2.from_instance(inst)
    res = gf2.solve(system, want_witness=args.witness)
    verdict = "SAT" if res.satisfiable else "UNSAT"
    sys.stdout.write(f"{verdict} rank_A={res.rank_A} rank_Ab={res.rank_Ab} m={inst.m} n={inst.n}\n")
    if args.witness and res.witness is not None:
        sys.stdout.write("".join(str(int(b)) for b in res.witness) + "\n")
    return 0 if res.satisfiable else 1


def _cmd_peel(args) -> int:
    inst = _read_instance(getattr(args, "in"))
    trace, core = peel_run(inst, args.seed, stride=args.stride)
    lines = ["tau,z1,z2"]
    for i in range(trace.tau.size):
        lines.append(f"{trace.tau[i]},{trace.z1[i]},{trace.z2[i]}")
    csv_text = "\n".join(lines) + "\n"
    summary = json.dumps(
        {
            "tau_c": trace.tau_c,
            "n_core": core.n_core,
            "m_core": core.m_core,
            "surplus": core.surplus,
        }
    )
    if args.out:
        _write(csv_text, args.out)
        sys.stdout.write(summary + "\n")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_traj(args) -> int:
    rep = experiments.run_trajectory(args.k, args.n, args.rho, args.trials, args.seed, args.epsilon)
    if args.format == "json":
        payload = {
            "k": rep.k,
            "n": rep.n,
            "rho": rep.rho,
            "trials": rep.trials,
            "max_dev": float(rep.max_dev),
            "normalized_dev": float(rep.normalized_dev),
            "tau": rep.tau.tolist(),
            "z1_mean": [float(_fmt9(v)) for v in rep.z1_mean],
            "z2_mean": [float(_fmt9(v)) for v in rep.z2_mean],
            "y1_theory": [float(_fmt9(v)) for v in rep.y1_theory],
            "y2_theory": [float(_fmt9(v)) for v in rep.y2_theory],
        }
        _write(json.dumps(payload) + "\n", args.out)
    else:
        _write(experiments.traj_csv(rep), args.out)
    return 0


def _cmd_scan(args) -> int:
    mode = "exact-gf2-on-core" if args.sat_mode == "exact" else "surplus-sign"
    cfg = experiments.ScanConfig(
        k=args.k,
        n_values=args.n,
        r_values=args.r,
        trials=args.trials,
        master_seed=args.seed,
        sat_mode=mode,
        threads=args.threads,
    )
    rows = experiments.run_scan(cfg)
    if args.format == "json":
        _write(experiments.scan_rows_json(rows), args.out)
    else:
        _write(experiments.scan_rows_csv(rows), args.out)
    return 0


def _cmd_surplus(args) -> int:
    rep = experiments.surplus_stats(args.k, args.n, args.r, args.trials, args.seed, args.threads)
    payload = {
        "k": rep.k,
        "n": rep.n,
        "r": rep.r,
        "m": rep.m,
        "trials": rep.trials,
        "mean_scaled": float(_fmt9(rep.mean_scaled)),
        "var_scaled": float(_fmt9(rep.var_scaled)),
        "skew_scaled": float(_fmt9(rep.skew_scaled)),
        "se_mean": float(_fmt9(rep.se_mean)),
        "theory_mean": float(_fmt9(rep.theory_mean)),
        "theory_var": float(_fmt9(rep.theory_var)),
    }
    _write(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_kernels(args) -> int:
    rep = experiments.compare_kernels(args.k, args.n, args.rho, args.trials, args.seed, args.theta_max)
    payload = {
        "k": rep.k,
        "n": rep.n,
        "rho": rep.rho,
        "trials": rep.trials,
        "sup_mean_diff": float(_fmt9(rep.sup_mean_diff)),
        "truncations": rep.truncations,
    }
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    if args.out:
        lines = ["tau,mean_exact_z1,mean_exact_z2,mean_approx_z1,mean_approx_z2,"
                 "sd_exact_z1,sd_exact_z2,sd_approx_z1,sd_approx_z2"]
        for i in range(rep.tau.size):
            vals = [
                rep.mean_exact[i, 0], rep.mean_exact[i, 1],
                rep.mean_approx[i, 0], rep.mean_approx[i, 1],
                rep.sd_exact[i, 0], rep.sd_exact[i, 1],
                rep.sd_approx[i, 0], rep.sd_approx[i, 1],
            ]
            lines.append(f"{rep.tau[i]}," + ",".join(_fmt9(v) for v in vals))
        _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_validate(args) -> int:
    results = validate.run_all()
    failed = 0
    for name, ok, detail in results:
        tag = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        sys.stdout.write(f"{tag}  {name}{suffix}\n")
        if not ok:
            failed += 1
    sys.stdout.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return 0 if failed == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="xorwindow",
        description="Random k-XORSAT finite-size scaling: theory constants and Monte Carlo validation.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("theory", help="print threshold/scaling constants for one k")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--json", action="store_true")
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_theory)

    q = sub.add_parser("gen", help="generate an instance (text format v1)")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    grp = q.add_mutually_exclusive_group(required=True)
    grp.add_argument("--m", type=int)
    grp.add_argument("--r", type=float, help="m = floor(n rho_k + r sqrt(n))")
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_gen)

    q = sub.add_parser("solve", help="exact GF(2) solve of an instance (exit 0 SAT, 1 UNSAT)")
    q.add_argument("--in", dest="in", default=None, help="instance path (default stdin)")
    q.add_argument("--witness", action="store_true")
    q.set_defaults(fn=_cmd_solve)

    q = sub.add_parser("peel", help="peel an instance to its 2-core; trace CSV")
    q.add_argument("--in", dest="in", default=None)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--stride", type=int, default=1)
    q.add_argument("--out", help="write trace CSV here and the core summary to stdout")
    q.set_defaults(fn=_cmd_peel)

    q = sub.add_parser("traj", help="mean peeling trajectory vs the ODE solution")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--rho", type=float, required=True)
    q.add_argument("--trials", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--epsilon", type=float, default=0.1)
    q.add_argument("--format", choices=("csv", "json"), default="csv")
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_traj)

    q = sub.add_parser("scan", help="Monte Carlo satisfiability scan over (n, r)")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--n", type=_int_list, required=True, help="comma-separated n values")
    q.add_argument("--r", type=_float_list, required=True, help="comma-separated r values")
    q.add_argument("--trials", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--sat-mode", choices=("exact", "surplus"), default="exact")
    q.add_argument("--threads", type=int, default=1)
    q.add_argument("--format", choices=("csv", "json"), default="csv")
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_scan)

    q = sub.add_parser("surplus", help="moments of core surplus / sqrt(n)")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--trials", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--threads", type=int, default=1)
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_surplus)

    q = sub.add_parser("kernels", help="exact peeling chain vs approximate kernel chain")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--rho", type=float, required=True)
    q.add_argument("--trials", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--theta-max", type=float, default=None)
    q.add_argument("--out", help="write the per-step comparison grid CSV here")
    q.set_defaults(fn=_cmd_kernels)

    q = sub.add_parser("validate", help="run the module invariant battery")
    q.set_defaults(fn=_cmd_validate)

    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, theory.NumericError) as exc:
        sys.stderr.write(f"xorwindow {args.command}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

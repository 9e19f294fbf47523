"""Command-line front end.

Subcommands: ``audit`` (ranks, dimensions and projector algebra),
``decompose`` (component norms of a curvature tensor file), ``torsion``
(six-component split and class mask, from a torsion tensor or nabla-omega
data), ``tables`` (the randomized contribution tables with a diff against
the embedded expectations), and ``make-tensor`` (write sample tensor files
for the two input formats).

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 ambiguous
table cells needing more seeds.  Output is deterministic: identical flags
and seeds give byte-identical reports.
"""

from __future__ import annotations

import argparse
import os
import sys


def _cap_threads() -> None:
    """Honor QHC_THREADS before numpy spins up its thread pools."""
    cap = os.environ.get("QHC_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qhcurv", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--n", type=int, required=True,
                        help="quaternionic dimension (2 or 3; 4 with --allow-large)")
        sp.add_argument("--tol", type=float, default=None,
                        help="override the default verification tolerance")
        sp.add_argument("--json", type=str, default=None, metavar="PATH",
                        help="write the JSON report here")
        sp.add_argument("--allow-large", action="store_true",
                        help="lift the dim**4 memory cap")

    sp = sub.add_parser("audit", help="dimension and projector-algebra audit")
    common(sp)

    sp = sub.add_parser("decompose", help="fine component norms of a curvature tensor")
    common(sp)
    sp.add_argument("--input", type=str, required=True, metavar="FILE")

    sp = sub.add_parser("torsion", help="six-component torsion classification")
    common(sp)
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--input", type=str, metavar="FILE",
                       help="rank-3 torsion tensor file")
    group.add_argument("--from-nabla-omega", nargs=3, metavar=("F1", "F2", "F3"),
                       help="three rank-3 nabla-omega tensor files (I, J, K)")

    sp = sub.add_parser("tables", help="contribution tables vs embedded expectations")
    common(sp)
    sp.add_argument("--seeds", type=int, default=8)

    sp = sub.add_parser("make-tensor", help="write a sample tensor file")
    common(sp)
    sp.add_argument("--kind", choices=["random-curvature", "qk-ray", "random-torsion",
                                       "nabla-omega"],
                    default="random-curvature")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", type=str, required=True, metavar="FILE")
    return p


def main(argv=None) -> int:
    _cap_threads()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0

    import numpy as np

    from . import curvature_space as cs
    from . import decomposition as dec
    from . import tensor_io as tio
    from . import tensor_ops as top
    from . import torsion as tor
    from .model_space import build_model

    if args.n < 2 or (args.n > 3 and not args.allow_large):
        print("qhcurv: --n must be 2 or 3 (larger needs --allow-large)", file=sys.stderr)
        return 1

    tol = args.tol if args.tol is not None else 1e-9
    try:
        m = build_model(args.n, allow_large=args.allow_large)
    except ValueError as exc:
        print(f"qhcurv: {exc}", file=sys.stderr)
        return 1

    if args.command == "audit":
        bank = dec.build_sp_projectors(m)
        report = dec.dimension_audit(bank, tol=tol)
        body = tio.jsonable(report.as_dict())
        results = [{"check": "dim_R", "value": report.dim_R,
                    "expected": report.dim_R_formula, "tolerance": 0},
                   {"check": "dim_QK", "value": report.dim_QK,
                    "expected": report.dim_QK_formula, "tolerance": 0},
                   {"check": "ranks", "value": body["ranks"],
                    "expected": body["expected_ranks"], "tolerance": 0},
                   {"check": "projector_algebra",
                    "value": body["algebra_residuals"], "tolerance": tol},
                   {"check": "eigen_residuals",
                    "value": body["eigen_residuals"], "tolerance": tol}]
        tio.write_report(args.json, args.n, "audit", {"tol": tol},
                         results, body["failures"])
        _emit(results, body["failures"])
        return 0 if report.ok else 2

    if args.command == "decompose":
        tens = tio.read_tensor(args.input)
        if tens.n != args.n or tens.rank != 4:
            print("qhcurv: decompose expects a rank-4 tensor with matching n",
                  file=sys.stderr)
            return 1
        try:
            R = cs.CurvatureTensor.certify(tens.data, tol=max(tol, 1e-10))
        except cs.CertificationError as exc:
            tio.write_report(args.json, args.n, "decompose", {"tol": tol},
                             [], [str(exc)])
            _emit([], [str(exc)])
            return 2
        bank = dec.build_sp_projectors(m)
        norms = dec.component_norms(bank, R)
        total = top.curvature_inner(R.tensor, R.tensor)
        recon = abs(sum(v * v for v in norms.values()) - total) / max(total, 1e-300)
        results = [{"check": "component_norms", "value": tio.jsonable(norms),
                    "tolerance": tol},
                   {"check": "qk_norm", "value": bank.component_norm(R.tensor, "QK"),
                    "tolerance": tol},
                   {"check": "qkperp_norm",
                    "value": bank.component_norm(R.tensor, "QKperp"), "tolerance": tol},
                   {"check": "reconstruction_residual", "value": recon,
                    "tolerance": 1e-8}]
        failures = [] if recon < 1e-8 else [f"reconstruction residual {recon}"]
        tio.write_report(args.json, args.n, "decompose", {"tol": tol},
                         results, failures)
        _emit(results, failures)
        return 0 if not failures else 2

    if args.command == "torsion":
        tbank = tor.build_torsion_bank(m)
        failures = []
        if args.input:
            tens = tio.read_tensor(args.input)
            if tens.rank != 3 or tens.n != args.n:
                print("qhcurv: torsion expects a rank-3 file with matching n",
                      file=sys.stderr)
                return 1
            t = tens.data
            resid = top.frob(tor.project_to_torsion_space(m, t) - t)
            if resid > tol * max(top.frob(t), 1e-300):
                failures.append(f"input outside the torsion space: residual {resid}")
        else:
            nws = [tio.read_tensor(f) for f in args.from_nabla_omega]
            if any(w.rank != 3 or w.n != args.n for w in nws):
                print("qhcurv: nabla-omega files must be rank 3 with matching n",
                      file=sys.stderr)
                return 1
            t, lambdas, resid = tor.torsion_from_nabla_omega(
                m, *[w.data for w in nws])
            if resid > max(tol, 1e-10):
                failures.append(f"nabla-omega data not realizable: residual {resid}")
        norms = tbank.component_norms(t)
        mask = tbank.class_mask(t)
        results = [{"check": "component_norms", "value": tio.jsonable(norms),
                    "tolerance": 1e-8},
                   {"check": "class_mask", "value": mask,
                    "order": list(tor.TORSION_COMPONENTS), "tolerance": 1e-8}]
        tio.write_report(args.json, args.n, "torsion", {"tol": tol},
                         results, failures)
        _emit(results, failures)
        return 0 if not failures else 2

    if args.command == "tables":
        from . import tables as tbl
        bank = dec.build_sp_projectors(m)
        tbank = tor.build_torsion_bank(m)
        report = tbl.run_tables(bank, tbank, seeds=args.seeds)
        cells = [{"source": c.source, "table": c.table, "target": c.target,
                  "tick": c.tick, "expected": c.expected, "status": c.status,
                  "witness": c.witness, "seeds": c.seeds_used}
                 for c in report.cells]
        failures = [f"{c.source} T{c.table} {c.target}" for c in report.mismatches]
        results = [{"check": "cells", "value": tio.jsonable(cells), "tolerance": None},
                   {"check": "remark_consistent",
                    "value": [f"{c.source} T{c.table} {c.target}"
                              for c in report.remark_cells], "tolerance": None},
                   {"check": "low_n_degenerate",
                    "value": [f"{c.source} T{c.table} {c.target}"
                              for c in report.cells if c.status == "low_n_zero"],
                    "tolerance": None},
                   {"check": "directions",
                    "value": tio.jsonable(report.direction_checks), "tolerance": 1e-8}]
        tio.write_report(args.json, args.n, "tables",
                         {"tick_on": tbl.TICK_ON, "tick_off": tbl.TICK_OFF},
                         results, failures)
        _emit(results, failures, quiet_keys={"cells", "directions"})
        if report.mismatches:
            return 2
        if report.ambiguous:
            return 3
        return 0

    if args.command == "make-tensor":
        if args.kind == "random-curvature":
            R = cs.random_curvature(m, args.seed)
            tio.write_tensor(args.output, args.n, R.tensor, certified=True)
        elif args.kind == "qk-ray":
            tio.write_tensor(args.output, args.n, m.pi2 + 2.0 * m.pi1, certified=True)
        elif args.kind == "random-torsion":
            rng = cs.substream("cli-torsion", args.seed)
            t = tor.project_to_torsion_space(
                m, rng.standard_normal((m.dim,) * 3))
            tio.write_tensor(args.output, args.n, t)
        else:
            rng = cs.substream("cli-nw", args.seed)
            t = tor.project_to_torsion_space(
                m, rng.standard_normal((m.dim,) * 3))
            lambdas = rng.standard_normal((3, m.dim))
            nws = tor.nabla_omega_from_torsion(m, t, lambdas)
            base = args.output
            for label, w in zip("IJK", nws):
                tio.write_tensor(f"{base}.{label}", args.n, w)
        return 0

    return 1


def _emit(results, failures, quiet_keys=frozenset()) -> None:
    import json as _json
    for item in results:
        key = item.get("check")
        if key in quiet_keys:
            print(f"{key}: ({len(item['value'])} entries)")
        else:
            print(f"{key}: {_json.dumps(item['value'], sort_keys=True)}")
    for f in failures:
        print(f"FAIL: {f}")


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``dlgaplab <command> [options]``.

Exit status is 0 when every requested check holds, 2 when a check is violated
(a reproduction bundle is written) and 1 on usage or solver errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DLGapLabError
from .hamiltonian import FFHamiltonian, decompose_layers, load_model, save_model, verify_frustration_free
from .models import FAMILIES, build_model

SWEEP_COLUMNS = ["model", "n", "d", "seed", "ordering_id", "lhs", "rhs", "eps_phi", "holds"]
TIGHTNESS_COLUMNS = ["g", "eps", "norm_sq", "energy", "ratio", "paper_factor"]

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for check violations here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.17g}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if math.isnan(f) else f
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _emit_json(doc: dict, path: str | None) -> None:
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_csv(columns: list[str], rows: list[list], path: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    if path:
        Path(path).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())


def _load_hamiltonian(args) -> FFHamiltonian:
    if args.model_json:
        return load_model(args.model_json)
    if not args.model:
        raise UsageError("one of --model or --model-json is required")
    if args.n is None:
        raise UsageError("--n is required with --model")
    return build_model(args.model, args.n, d=args.d, rank=args.rank, seed=args.seed)


def _write_bundle(args, H: FFHamiltonian, failures: list[dict], extra: dict | None = None) -> Path:
    """Reproduction bundle: the model, the full config and the failing cases."""
    root = Path(args.repro_dir) / f"{args.command}-seed{args.seed}"
    root.mkdir(parents=True, exist_ok=True)
    save_model(H, root / "model.json")
    (root / "config.json").write_text(json.dumps(_jsonable(_config(args)), indent=2, sort_keys=True), encoding="utf-8")
    doc = {"failures": failures}
    doc.update(extra or {})
    (root / "failures.json").write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True), encoding="utf-8")
    print(f"check violated; reproduction bundle written to {root}", file=sys.stderr)
    return root


def _spectrum(H: FFHamiltonian, args, require_gap: bool = True):
    from .spectra import ground_space

    return ground_space(H, tol=args.tol, solver=args.solver, seed=args.seed, require_gap=require_gap)


# --- subcommands -----------------------------------------------------------


def cmd_gap(args) -> int:
    H = _load_hamiltonian(args)
    sp = _spectrum(H, args, require_gap=False)
    ff = verify_frustration_free(H, solver=args.solver, seed=args.seed)
    doc = {
        "config": _config(args),
        "model": H.label,
        "n": H.n,
        "d": H.d,
        "m": H.m,
        "spectrum": sp.to_json_dict(),
        "frustration_free": ff.is_ff,
    }
    _emit_json(doc, args.out)
    if not ff.is_ff:
        _write_bundle(args, H, [{"check": "frustration_free", "epsilon0": ff.epsilon0}])
        return EXIT_VIOLATION
    return EXIT_OK


def _sweep_command(args, kind: str) -> int:
    from .dlcore import ProjectorOrdering, low_energy_states, random_unit_states, sweep
    from .hamiltonian import interaction_graph

    H = _load_hamiltonian(args)
    rng = np.random.default_rng(args.seed)
    states = random_unit_states(H.dim, args.states, rng)
    if kind == "converse" and args.low_energy:
        sp = _spectrum(H, args, require_gap=False)
        states = np.concatenate([states, low_energy_states(sp.ground_basis, args.low_energy, rng)], axis=1)
    orderings = [ProjectorOrdering.random(H.m, rng) for _ in range(args.orderings)]
    g = None
    if kind == "dl":
        g = args.g if args.g is not None else interaction_graph(H, args.g_mode).g
    rows = sweep(H, states, orderings, kind, g=g)

    csv_rows = [[H.label, H.n, H.d, args.seed, r.ordering_id, r.lhs, r.rhs, r.eps_phi, r.holds] for r in rows]
    _emit_csv(SWEEP_COLUMNS, csv_rows, args.csv)
    margins = [(r.rhs - r.lhs) if kind == "dl" else (r.lhs - r.rhs) for r in rows]
    bad = [r for r in rows if not r.holds]
    summary = {
        "config": _config(args),
        "model": H.label,
        "kind": kind,
        "g": g,
        "cases": len(rows),
        "violations": len(bad),
        "min_margin": min(margins),
        "max_margin": max(margins),
        "holds": not bad,
    }
    if args.out or args.csv:
        _emit_json(summary, args.out)
    else:
        print(json.dumps(_jsonable(summary), sort_keys=True), file=sys.stderr)
    if bad:
        failures = [
            {"ordering_id": r.ordering_id, "ordering": list(orderings[r.ordering_id].sequence), "state_id": r.state_id,
             "lhs": r.lhs, "rhs": r.rhs}
            for r in bad
        ]
        root = _write_bundle(args, H, failures)
        np.save(root / "states.npy", states[:, sorted({r.state_id for r in bad})])
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_dl_verify(args) -> int:
    return _sweep_command(args, "dl")


def cmd_converse_verify(args) -> int:
    return _sweep_command(args, "converse")


def cmd_delta(args) -> int:
    from .dlcore import compute_delta

    H = _load_hamiltonian(args)
    sp = _spectrum(H, args)
    rep = compute_delta(H, decompose_layers(H), sp, seed=args.seed, g=args.g)
    holds = rep.sandwich_holds and rep.corollary_holds
    _emit_json({"config": _config(args), "model": H.label, "spectrum": sp.to_json_dict(), "delta": rep.to_json_dict(),
                "holds": holds}, args.out)
    if not holds:
        _write_bundle(args, H, [rep.to_json_dict()])
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_lightcone(args) -> int:
    from .coarsegrain import build_coarse_hamiltonian, verify_lightcone_identity

    H = _load_hamiltonian(args)
    cg = build_coarse_hamiltonian(H, args.r, solver=args.solver, seed=args.seed, tol=args.tol)
    qs = args.q if args.q else list(range(args.r // 4 + 1))
    checks = [verify_lightcone_identity(H, args.r, q, cg=cg, seed=args.seed) for q in qs]
    results = [{"q": c.q, "residual": c.residual, "holds": c.holds, "method": c.method} for c in checks]
    holds = all(c.holds for c in checks)
    _emit_json({"config": _config(args), "model": H.label, "r": args.r, "results": results, "holds": holds}, args.out)
    if not holds:
        _write_bundle(args, H, [r for r in results if not r["holds"]])
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_coarse(args) -> int:
    from .coarsegrain import build_coarse_hamiltonian, verify_gap_amplification

    H = _load_hamiltonian(args)
    cg = build_coarse_hamiltonian(H, args.r, solver=args.solver, seed=args.seed, tol=args.tol)
    rep = verify_gap_amplification(H, args.r, q=args.q, cg=cg, seed=args.seed)
    doc = {"config": _config(args), "report": rep.to_json_dict(), "holds": rep.holds}
    _emit_json(doc, args.out)
    if not rep.holds:
        _write_bundle(args, H, [rep.to_json_dict()])
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_cheb(args) -> int:
    from .chebyshev import ChebyshevFilter, apply_filter, eval_scalar, gap_substitution, verify_cheb_bound

    doc = {"config": _config(args)}
    H = None
    if args.model or args.model_json:
        H = _load_hamiltonian(args)
        sp = _spectrum(H, args)
    h = args.h
    if h is None:
        if H is None:
            raise UsageError("--h is required unless a model is given")
        h = gap_substitution(sp.gamma)
    f = ChebyshevFilter(args.q, h)
    chk = verify_cheb_bound(f, args.grid)
    one = abs(float(eval_scalar(f, 1.0)) - 1.0)
    holds = chk.holds and one <= 1e-12
    doc.update({"q": args.q, "h": h, "grid": args.grid, "max_abs": chk.max_abs, "bound": chk.bound,
                "normalization_error": one, "scalar_holds": holds})
    if H is not None:
        from .dlcore import apply_dl, apply_dl_adjoint
        from .spectra import restricted_operator_norm

        layers = decompose_layers(H)

        def a_action(v):
            return apply_dl_adjoint(H, layers, apply_dl(H, layers, v))

        op_norm = restricted_operator_norm(lambda v: apply_filter(f, a_action, v), H.dim, sp.ground_basis,
                                           seed=args.seed)
        op_holds = op_norm <= chk.bound + 1e-9
        doc.update({"model": H.label, "gamma": sp.gamma, "operator_norm": op_norm, "operator_holds": op_holds})
        holds = holds and op_holds
    doc["holds"] = holds
    _emit_json(doc, args.out)
    if not holds:
        if H is not None:
            _write_bundle(args, H, [doc])
        else:
            print("check violated: " + json.dumps(_jsonable(doc)), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_tightness(args) -> int:
    from .tightness import TightnessInstance, final_energy, sequential_residual, tightness_ratio

    rows, bad = [], []
    for g in args.g:
        t = TightnessInstance(g, args.eps)
        res = sequential_residual(t)
        en = final_energy(t)
        ra = tightness_ratio(t)
        rows.append([g, args.eps, res.norm_sq, en.energy, ra.ratio, ra.paper_factor])
        if not (en.holds and ra.holds):
            bad.append({"g": g, "energy": en.energy, "lower_bound": en.lower_bound, "ratio": ra.ratio})
    _emit_csv(TIGHTNESS_COLUMNS, rows, args.csv)
    if args.out:
        _emit_json({"config": _config(args), "rows": [dict(zip(TIGHTNESS_COLUMNS, r)) for r in rows],
                    "holds": not bad}, args.out)
    if bad:
        print("check violated: " + json.dumps(_jsonable(bad)), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_report(args) -> int:
    from .acceptance import CRITERIA, run_suite

    numbers = args.only or sorted(CRITERIA)
    unknown = [k for k in numbers if k not in CRITERIA]
    if unknown:
        raise UsageError(f"unknown criteria {unknown}; choose from {sorted(CRITERIA)}")
    results = run_suite(numbers, echo=lambda line: print(line, file=sys.stderr))
    passed = all(r.passed for r in results)
    doc = {
        "config": _config(args),
        "version": __version__,
        "criteria": [r.to_json_dict() for r in results],
        "verdict": "pass" if passed else "fail",
    }
    _emit_json(doc, args.out)
    return EXIT_OK if passed else EXIT_VIOLATION


# --- parser ----------------------------------------------------------------


def _model_options(p: argparse.ArgumentParser, required: bool = True) -> None:
    grp = p.add_argument_group("model")
    grp.add_argument("--model", choices=FAMILIES, help="zoo family")
    grp.add_argument("--model-json", help="model-spec JSON file (overrides --model)")
    grp.add_argument("--n", type=int, help="number of sites")
    grp.add_argument("--d", type=int, help="local dimension (random family only)")
    grp.add_argument("--rank", type=int, default=1, help="term rank (random family only)")


def _common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed of the single generator used by the run")
    p.add_argument("--solver", choices=("auto", "dense", "iterative"), default="auto")
    p.add_argument("--tol", type=float, default=1e-9, help="eigenvalue clustering tolerance")
    p.add_argument("--out", help="JSON output path (default: stdout)")
    p.add_argument("--repro-dir", default="repro", help="where reproduction bundles are written")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dlgaplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def add(name, func, help_text, model=True):
        p = sub.add_parser(name, help=help_text, description=help_text)
        if model:
            _model_options(p)
        _common_options(p)
        p.set_defaults(func=func)
        return p

    add("gap", cmd_gap, "spectral report of a model")

    for name, func, text in (
        ("dl-verify", cmd_dl_verify, "sweep the detectability-lemma inequality over states and orderings"),
        ("converse-verify", cmd_converse_verify, "sweep the converse inequality over states and orderings"),
    ):
        p = add(name, func, text)
        p.add_argument("--states", type=int, default=100)
        p.add_argument("--orderings", type=int, default=10)
        p.add_argument("--csv", help="CSV output path (default: stdout)")
        if name == "dl-verify":
            p.add_argument("--g", type=int, help="override the interaction degree")
            p.add_argument("--g-mode", choices=("support-overlap", "exact-commutator"), default="support-overlap")
        else:
            p.add_argument("--low-energy", type=int, default=0, help="extra states near the ground space")

    p = add("delta", cmd_delta, "shrinking factor Delta with its gap sandwich")
    p.add_argument("--g", type=int, help="override the interaction degree")

    p = add("lightcone", cmd_lightcone, "light-cone identity of the coarse layers")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--q", type=int, action="append", help="depth (repeatable; default 0..r/4)")

    p = add("coarse", cmd_coarse, "coarse-grained Hamiltonian and gap amplification verdict")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--q", type=int, help="filter degree (default r/4)")

    p = add("cheb", cmd_cheb, "Chebyshev filter bound, scalar and optionally on a model")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--h", type=float, help="spectral ceiling (default from the model gap)")
    p.add_argument("--grid", type=int, default=10_000)

    p = add("tightness", cmd_tightness, "single-qubit tightness instance", model=False)
    p.add_argument("--g", type=int, nargs="+", required=True)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--csv", help="CSV output path (default: stdout)")

    p = add("report", cmd_report, "run the acceptance suite and emit one verdict document", model=False)
    p.add_argument("--scale", choices=("desk",), default="desk")
    p.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dlgaplab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (DLGapLabError, ValueError, RuntimeError, OSError) as exc:
        print(f"dlgaplab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

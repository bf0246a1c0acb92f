"""Command line entry point: ``homolattice <command> ...``.

Exit codes: 0 when every requested check passes, 1 when one fails, 2 for
usage or parse errors, 3 when an exhaustive search exceeds its cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import codes, ftgate, gf2, hprod
from .chain_complex import AsymmetricCode, ChainComplex, CssCode, boundary_from_css, canonical_form, css_from_boundary
from .codes import CapExceeded, LowerBound

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

PRODUCT_ALIASES = {"prod422": ("422", "422"), "prod147": ("steane", "rm15-padded")}


class UsageError(Exception):
    pass


# -- target resolution ------------------------------------------------------------------


def _read_code_file(path: Path):
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            return CssCode.from_dict(json.loads(text))
        except (json.JSONDecodeError, KeyError) as exc:
            raise UsageError(f"{path}: {exc}") from None
    try:
        m = gf2.from_text(text)
    except gf2.MatrixParseError as exc:
        raise UsageError(f"{path}: {exc}") from None
    return ChainComplex(m, name=path.stem)


def resolve_code(name: str):
    """A catalog name or a file path, as a ``CssCode`` or ``ChainComplex``."""
    path = Path(name)
    if path.is_file():
        return _read_code_file(path)
    try:
        return codes.get(name)
    except codes.UnknownCode:
        raise UsageError(f"unknown code {name!r}; catalog: {', '.join(codes.CATALOG_NAMES)}, double:<name>") from None


def resolve_complex(name: str) -> ChainComplex:
    obj = resolve_code(name)
    if isinstance(obj, ChainComplex):
        return obj
    if obj.boundary is not None:
        return ChainComplex(obj.boundary, name=obj.name or name)
    try:
        return boundary_from_css(obj)
    except AsymmetricCode as exc:
        raise UsageError(f"{name}: {exc}; pad it first") from None


def resolve_target(name: str):
    """Code, or a product for ``prod422``, ``prod147`` and ``A,B``."""
    if name in PRODUCT_ALIASES:
        a, b = PRODUCT_ALIASES[name]
        return hprod.homological_product(resolve_complex(a), resolve_complex(b), name=name)
    if "," in name:
        a, b = name.split(",", 1)
        return hprod.homological_product(resolve_complex(a), resolve_complex(b), name=name)
    return resolve_code(name)


def resolve_product(name: str) -> hprod.ProductCode:
    target = resolve_target(name)
    if not isinstance(target, hprod.ProductCode):
        raise UsageError(f"{name!r} is not a product; use prod422, prod147 or A,B")
    return target


# -- output -------------------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _distance_value(v):
    if isinstance(v, LowerBound):
        return {"lower_bound": v.cap + 1}
    return v


def _as_int(v) -> int:
    return v.cap + 1 if isinstance(v, LowerBound) else int(v)


# -- commands -------------------------------------------------------------------------------


def cmd_build(args) -> int:
    obj = resolve_code(args.code)
    code = obj if isinstance(obj, CssCode) else css_from_boundary(obj)
    boundary = obj.boundary if isinstance(obj, ChainComplex) else code.boundary
    name = code.name or Path(args.code).stem
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if boundary is not None:
            (out / f"{name}.txt").write_text(gf2.to_text(boundary), encoding="utf-8", newline="\n")
        (out / f"{name}.json").write_text(_dumps(code.to_dict()), encoding="utf-8", newline="\n")
    fmt = args.format or ("text" if boundary is not None else "json")
    if fmt == "text":
        if boundary is None:
            raise UsageError(f"{name} has no boundary operator (asymmetric); use --format json")
        sys.stdout.write(gf2.to_text(boundary))
    else:
        sys.stdout.write(_dumps(code.to_dict()))
    return EXIT_OK


def cmd_product(args) -> int:
    c1, c2 = resolve_complex(args.code1), resolve_complex(args.code2)
    product = hprod.homological_product(c1, c2)
    d1 = codes.distance(c1, cap=args.cap)
    d2 = codes.distance(c2, cap=args.cap)
    report = hprod.product_params(
        c1, c2, (_as_int(d1.x), _as_int(d1.z)), (_as_int(d2.x), _as_int(d2.z))
    ).to_dict()
    report["n"] = product.n
    report["factor_distances"] = [d1.to_dict(), d2.to_dict()]
    report["distances_exact"] = d1.exact and d2.exact
    if args.boundary_out:
        with open(args.boundary_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(gf2.to_text(product.boundary))
    _emit(_dumps(report), args.out)
    return EXIT_OK


def _check(name: str, passed: bool, **detail) -> dict:
    return {"check": name, "passed": bool(passed), **detail}


def _run_check(check: str, target, args) -> dict:
    if check == "boundary-squared":
        d = target.boundary
        if d is None:
            return _check(check, False, reason="code has no boundary operator")
        return _check(check, not gf2.multiply(d, d).any())
    if check == "k":
        if isinstance(target, hprod.ProductCode):
            direct = target.n - 2 * gf2.rank(target.boundary)
            return _check(check, direct == target.factor1.k * target.factor2.k, k=direct)
        code = codes.as_code(target)
        return _check(check, True, k=code.k)
    if check == "canonical-form":
        form = canonical_form(target if not isinstance(target, hprod.ProductCode) else target.complex)
        d = target.boundary
        ok = d is None or np.array_equal(form.boundary, d)
        return _check(check, ok, k=form.k, l=form.l, gates=len(form.encoder_circuit))
    if not isinstance(target, hprod.ProductCode):
        raise UsageError(f"check {check!r} needs a product target")
    if check == "kernel-identity":
        return _check(check, hprod.kernel_identity_holds(target))
    if check == "sparsity-bound":
        w = gf2.max_weight(target.boundary)
        bound = target.factor1.sparsity + target.factor2.sparsity
        return _check(check, w <= bound, sparsity=w, bound=bound)
    if check == "band-theorem":
        axes = (1, 2) if args.axis is None else (args.axis,)
        results = []
        for axis in axes:
            budget = args.budget
            if budget is None:
                guard = target.factor1 if axis == 1 else target.factor2
                budget = _as_int(codes.distance(guard, cap=args.cap).min) - 1
            kwargs = {"samples": args.samples, "seed": _seed(args)}
            results.append(ftgate.check_band_theorem(target, axis, budget, args.mode, cap=args.enum_cap, **kwargs).to_dict())
        return _check(check, all(r["passed"] for r in results), results=results)
    if check == "distance-window":
        d = codes.distance(target, cap=args.cap)
        d1 = codes.distance(target.factor1, cap=args.cap)
        d2 = codes.distance(target.factor2, cap=args.cap)
        ok = True
        windows = {}
        for axis in ("x", "z"):
            a, b, v = getattr(d1, axis), getattr(d2, axis), getattr(d, axis)
            if any(isinstance(u, LowerBound) for u in (a, b, v)):
                ok = False
                windows[axis] = {"undetermined": True}
                continue
            lo, hi = max(a, b), a * b
            windows[axis] = {"distance": v, "window": [lo, hi]}
            ok &= lo <= v <= hi
        return _check(check, ok, **windows)
    raise UsageError(f"unknown check {check!r}")


CHECKS = ("boundary-squared", "k", "canonical-form", "kernel-identity", "sparsity-bound", "band-theorem", "distance-window")


def cmd_verify(args) -> int:
    target = resolve_target(args.target)
    results = [_run_check(c, target, args) for c in (args.check or ["boundary-squared"])]
    passed = all(r["passed"] for r in results)
    _emit(_dumps({"target": args.target, "passed": passed, "checks": results}), args.out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_distance(args) -> int:
    target = resolve_target(args.target)
    code = codes.as_code(target)
    d = codes.distance(code, cap=args.cap, method=args.method)
    out = {"target": args.target, "n": code.n, "k": code.k, "cap": args.cap,
           "dx": _distance_value(d.x), "dz": _distance_value(d.z)}
    _emit(_dumps(out), args.out)
    return EXIT_OK


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("HOMOLATTICE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"HOMOLATTICE_SEED must be an integer, got {env!r}") from None
    return 0


def _schedule(args) -> ftgate.GateSchedule:
    product = resolve_product(args.target)
    layer = []
    if args.layer and args.layer.lower() != "none":
        blocks = tuple(int(b) for b in str(args.block).split(","))
        layer = ftgate.transversal_layer(product, args.unencode, args.layer, blocks=blocks)
    return ftgate.build_protocol(product, args.unencode, layer, name=args.target)


def cmd_protocol(args) -> int:
    schedule = _schedule(args)
    if args.schedule_out:
        with open(args.schedule_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(schedule.to_text())
    if args.sweep == "single-fault":
        result = ftgate.single_fault_sweep(
            schedule, args.correct, idle=not args.no_idle, check_mapping=args.check_mapping
        )
        _emit(_dumps(result.to_dict()), args.out)
        ok = result.logical_failures == 0 and result.mapping_mismatches == 0
        return EXIT_OK if ok else EXIT_FAIL
    model = ftgate.ErrorModel(args.p, idle=not args.no_idle, seed=_seed(args))
    record = ftgate.fault_injection_run(schedule, model, args.trials, args.correct, jobs=args.jobs)
    _emit(record.to_json(), args.out)
    return EXIT_OK


def cmd_profile(args) -> int:
    schedule = _schedule(args)
    profile = ftgate.sparsity_profile(schedule)
    if args.csv:
        lines = ["step,phase,sparsity"]
        lines += [f"{st.index},{st.phase},{w}" for st, w in zip(schedule.steps, profile)]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(_dumps({"schedule_id": schedule.schedule_id, "steps": len(profile), "profile": profile}), args.out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homolattice", description="Homological product code toolkit.")
    parser.add_argument("--config", help="JSON file of option defaults; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="emit a catalog code or parsed file")
    p.add_argument("code")
    p.add_argument("--out-dir")
    p.add_argument("--format", choices=("text", "json"))
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("product", help="homological product report")
    p.add_argument("code1")
    p.add_argument("code2")
    p.add_argument("--cap", type=int, default=7)
    p.add_argument("--out")
    p.add_argument("--boundary-out")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("verify", help="run invariant checks")
    p.add_argument("target")
    p.add_argument("--check", action="append", choices=CHECKS)
    p.add_argument("--axis", type=int, choices=(1, 2))
    p.add_argument("--budget", type=int)
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--cap", type=int, default=6, help="distance search cap")
    p.add_argument("--enum-cap", type=int, default=5_000_000, help="band enumeration cap")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("distance", help="brute-force distance oracle")
    p.add_argument("target")
    p.add_argument("--cap", type=int, default=5)
    p.add_argument("--method", choices=("auto", "plain", "mitm"), default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_distance)

    for name, func, text in (("protocol", cmd_protocol, "build and simulate a protocol"),
                             ("profile", cmd_profile, "per-step sparsity of a protocol")):
        p = sub.add_parser(name, help=text)
        p.add_argument("target")
        p.add_argument("--unencode", type=int, choices=(1, 2), default=2)
        p.add_argument("--layer", default="none", help="transversal gate: H, S, SDG, X, Z, T, CX or none")
        p.add_argument("--block", default="0", help="logical block(s), comma separated for CX")
        p.add_argument("--out")
        p.set_defaults(func=func)
        if name == "protocol":
            p.add_argument("--sweep", choices=("single-fault",))
            p.add_argument("--correct", choices=ftgate.CORRECT_AT, default="end")
            p.add_argument("--p", type=float, default=1e-3)
            p.add_argument("--trials", type=int, default=1000)
            p.add_argument("--seed", type=int)
            p.add_argument("--jobs", type=int, default=1)
            p.add_argument("--no-idle", action="store_true", help="skip idle-qubit fault locations")
            p.add_argument("--check-mapping", action="store_true")
            p.add_argument("--schedule-out")
        else:
            p.add_argument("--csv", action="store_true")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"config {args.config}: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError("config file must hold a JSON object")
    # re-parse with config values as defaults so explicit flags still win
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ftgate.NotTransversal, gf2.DimensionMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

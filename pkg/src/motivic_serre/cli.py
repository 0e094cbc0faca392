"""Command-line interface.

Exit status: 0 success, 1 domain error (invalid model, inadmissible center,
failed verification, ...), 2 parse or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .blowup import InadmissibleCenter, blow_up, center_from_json
from .catalog import TYPES, CatalogError, catalog
from .invariant import SpecializationError, serre, serre_tilde, specialize, substitute
from .model import (ConstructibleDatum, ModelError, datum_from_json, datum_to_json, dump_json,
                    full_fiber_datum, load_json, model_from_json, model_to_json, validate)
from .ring import (LPoly, ParseError, format_rational, lpoly_from_json, parse_rational,
                   truncated_to_json)
from .verify import (DEFAULT_PARAMS, Params, RefineFamily, chain_blowups, chain_is_constant,
                     check_invariance, published_seeds, random_chain, random_instance,
                     refine_search, deep_family, solve_pair_coefficients, trial_record)


class UsageError(Exception):
    pass


def _load(path, parser):
    try:
        return parser(load_json(path))
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _load_assignment(arg) -> dict:
    if os.path.exists(arg):
        obj = load_json(arg)
    else:
        try:
            obj = json.loads(arg)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--assign: neither a file nor JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ParseError("--assign: expected an object mapping symbols to values")
    out = {}
    for sym, val in obj.items():
        out[sym] = lpoly_from_json(val) if isinstance(val, dict) else LPoly([parse_rational(val)])
    return out


def _expand_wildcard(assign: dict, symbols) -> dict:
    if "*" not in assign:
        return assign
    out = {s: assign["*"] for s in symbols}
    out.update({k: v for k, v in assign.items() if k != "*"})
    return out


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def cmd_validate(args) -> int:
    model = _load(args.model, model_from_json)
    problems = validate(model)
    text = "valid" if not problems else "invalid:\n" + "\n".join(f"  - {p}" for p in problems)
    _emit(args, {"valid": not problems, "violations": problems}, text)
    return 0 if not problems else 1


def cmd_invariant(args) -> int:
    n = args.mod_power or 2
    model = _load(args.model, model_from_json)
    problems = validate(model)
    if problems:
        raise ModelError("; ".join(problems))
    datum = _load(args.datum, datum_from_json) if args.datum else full_fiber_datum(model)
    s1 = serre(model, datum)
    sn = serre_tilde(model, datum, n)
    payload = {"serre": truncated_to_json(s1), "serre_tilde": truncated_to_json(sn)}
    lines = []
    if args.assign:
        assign = _expand_wildcard(_load_assignment(args.assign), s1.symbols() | sn.symbols())
        v1, vn = substitute(s1, assign), substitute(sn, assign)
        payload["serre_substituted"] = [format_rational(c) for c in v1.coeffs]
        payload["serre_tilde_substituted"] = [format_rational(c) for c in vn.coeffs]
        lines += [f"S  mod (L-1): {v1}", f"S~ mod (L-1)^{n}: {vn}"]
        if args.q is not None:
            r1, rn = specialize(s1, assign, args.q), specialize(sn, assign, args.q)
            payload["specialization"] = {
                "q": args.q, "residue": r1.residue, "modulus": args.q - 1,
                "value": format_rational(rn.value), "canonical": rn.canonical}
            lines += [f"Serre residue at q={args.q}: {r1.describe()}",
                      f"S~ at L={args.q}: {rn.describe()}"]
    else:
        if args.q is not None:
            raise UsageError("--q requires --assign")
        lines += [f"S  mod (L-1): {s1}", f"S~ mod (L-1)^{n}: {sn}"]
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_blowup(args) -> int:
    model = _load(args.model, model_from_json)
    center = _load(args.center, center_from_json)
    if args.datum:
        datum = _load(args.datum, datum_from_json)
    else:
        datum = ConstructibleDatum(full_fiber_datum(model).on_strata, dict(center.traces))
    res = blow_up(model, center, datum)
    paths = {"model": f"{args.out}.model.json", "datum": f"{args.out}.datum.json",
             "log": f"{args.out}.log.json"}
    dump_json(model_to_json(res.new_model), paths["model"])
    dump_json(datum_to_json(res.transported_datum), paths["datum"])
    dump_json(res.move_log.to_json(), paths["log"])
    comps = ", ".join(f"{i}:{a}" for i, a in res.new_model.components.items())
    _emit(args, {"written": paths, "move_log": res.move_log.to_json()},
          f"a0 = {res.move_log.a0}; components {{{comps}}}\n"
          + "\n".join(f"wrote {p}" for p in paths.values()))
    return 0


def _seed_list(args) -> list[int]:
    if args.seeds and args.seed is not None:
        raise UsageError("use either --seeds or --seed/--trials")
    if args.seeds:
        data = load_json(args.seeds)
        if isinstance(data, dict):
            data = data.get("chains" if args.chain else "single", [])
        if not isinstance(data, list) or not all(isinstance(s, int) for s in data):
            raise ParseError(f"{args.seeds}: expected a list of integer seeds")
        return data
    if args.seed is not None:
        return [args.seed + k for k in range(args.trials)]
    return published_seeds("chains" if args.chain else "single")


def cmd_verify(args) -> int:
    n = args.mod_power or 2
    params = Params(**json.loads(args.params)) if args.params else DEFAULT_PARAMS
    records = []
    if args.family == "deep":
        for inst in deep_family():
            rep = check_invariance(inst, n)
            records.append({"seed": None, "label": inst.label, "params": None,
                            "modulus_power": n, "equal": rep.equal, "a0": rep.move_log.a0,
                            "lhs": truncated_to_json(rep.lhs), "rhs": truncated_to_json(rep.rhs)})
    elif args.chain:
        for seed in _seed_list(args):
            inst, moves = random_chain(seed, args.chain, params)
            reps = chain_blowups(inst, moves, n)
            records.append({"seed": seed, "params": params.__dict__, "modulus_power": n,
                            "chain_length": args.chain, "equal": chain_is_constant(reps),
                            "steps": [r.to_json() for r in reps]})
    else:
        for seed in _seed_list(args):
            records.append(trial_record(random_instance(seed, params), n))
    failures = sum(not r["equal"] for r in records)
    if args.report:
        dump_json(records, args.report)
    kind = "probe" if args.probe else "verify"
    summary = (f"{kind}: {len(records)} trials at modulus power {n}, "
               f"{failures} failure(s)")
    _emit(args, {"trials": len(records), "failures": failures, "modulus_power": n,
                 "report": args.report}, summary)
    if args.probe:
        return 0
    return 0 if failures == 0 else 1


def cmd_catalog(args) -> int:
    model = catalog(args.type, args.param)
    payload = model_to_json(model)
    if args.out:
        dump_json(payload, args.out)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, indent=2))
    return 0


def cmd_solve(args) -> int:
    if args.refine:
        n = args.mod_power or 3
        family = RefineFamily(sizes=tuple(args.sizes), max_multiplicity=args.max_multiplicity,
                              max_fiber_dim=args.max_fiber_dim)
        system = refine_search(n, family)
        _emit(args, system.to_json(), system.describe())
        return 0
    if args.bound is None:
        raise UsageError("solve needs --bound or --refine")
    system = solve_pair_coefficients(args.bound)
    reciprocal = {u: Fraction(1, u[0] * u[1]) for u in system.unknowns}
    holds = not system.satisfied_by(reciprocal)
    payload = system.to_json()
    payload["reciprocal_satisfies_all"] = holds
    _emit(args, payload, system.describe()
          + f"\nc(a,b)=1/(ab) satisfies every equation: {'yes' if holds else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")
    common.add_argument("--mod-power", type=int, default=argparse.SUPPRESS, metavar="N",
                        help="truncation power n of Q[L]/(L-1)^n (default 2; 3 for solve --refine)")

    p = argparse.ArgumentParser(prog="motivic-serre", parents=[common],
                                description="Motivic Serre invariants of snc models.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a model file")
    s.add_argument("model")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("invariant", parents=[common], help="compute S and S~")
    s.add_argument("model")
    s.add_argument("datum", nargs="?", help="constructible datum (default: whole special fibre)")
    s.add_argument("--assign", help="JSON file or inline JSON: symbol -> rational or lpoly; '*' = all")
    s.add_argument("--q", type=int, help="specialize L to q (needs --assign)")
    s.set_defaults(func=cmd_invariant)

    s = sub.add_parser("blowup", parents=[common], help="blow up along a center")
    s.add_argument("model")
    s.add_argument("center")
    s.add_argument("datum", nargs="?")
    s.add_argument("--out", required=True, help="output prefix")
    s.set_defaults(func=cmd_blowup)

    s = sub.add_parser("verify", parents=[common], help="randomized invariance checks")
    s.add_argument("--seeds", help="JSON list of seeds (default: published seeds)")
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--chain", type=int, default=0, metavar="LEN", help="run blowup chains of LEN moves")
    s.add_argument("--family", choices=("random", "deep"), default="random")
    s.add_argument("--params", help="JSON object overriding generation parameters")
    s.add_argument("--probe", action="store_true", help="report failures without failing the run")
    s.add_argument("--report", help="write the per-trial JSON report here")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("catalog", parents=[common], help="emit a Kodaira fixture model")
    s.add_argument("--type", required=True, help=", ".join(TYPES))
    s.add_argument("--param", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("solve", parents=[common], help="coefficient solvers")
    s.add_argument("--bound", type=int)
    s.add_argument("--refine", action="store_true")
    s.add_argument("--sizes", type=int, nargs="+", default=[3])
    s.add_argument("--max-multiplicity", type=int, default=3)
    s.add_argument("--max-fiber-dim", type=int, default=4)
    s.set_defaults(func=cmd_solve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.json = getattr(args, "json", False)
    args.mod_power = getattr(args, "mod_power", None)
    if args.mod_power is not None and args.mod_power < 1:
        print("error: --mod-power must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ParseError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, InadmissibleCenter, CatalogError, SpecializationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

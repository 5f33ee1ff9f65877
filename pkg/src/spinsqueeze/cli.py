"""Command-line front end.

Subcommands::

    spinsqueeze witness records.json [--format text|json]
    spinsqueeze fs-curve --spin 2S [--points n] [--out file.csv]
    spinsqueeze bounds --modes M [M ...]
    spinsqueeze bounds --depth N --pmax P [--polarization-grid]
    spinsqueeze split-check --spin 2S --lambda L --modes M

Exit codes: 0 success, 2 input error, 3 numerical or consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import jsonschema
import numpy as np

from .errors import (ConsistencyError, DegenerateInput, NonConvergence,
                     SpinSqueezeError)
from .sm_curves import MIN_POINTS, build_fs_table
from .spin_core import SpinLength, build_hamiltonian, ground_state
from .split_model import equivalence_check
from .witnesses import (MAX_ENUMERATION_MODES, CollectiveMoments,
                        ModeMomentSet, build_report,
                        depth_bound_state_independent, mode_threshold,
                        sm_xi2_bound)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = ("NonConvergence", "ConsistencyError")
POLARIZATION_GRID = (1e-3,) + tuple(round(0.05 * i, 2) for i in range(1, 21))

_NUMBER = {"type": "number"}
_PAIRS = {
    "type": "array",
    "items": {"type": "array", "items": [{"type": "integer", "minimum": 0}, _NUMBER],
              "minItems": 2, "additionalItems": False},
}
RECORD_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["records"],
    "additionalProperties": False,
    "properties": {
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "var_sz", "mean_sx"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string"},
                    "n": {"type": "integer", "minimum": 1},
                    "var_sz": {"type": "number", "minimum": 0},
                    "mean_sx": _NUMBER,
                    "m": {"type": "integer", "minimum": 2},
                    "modes": {
                        "type": "array",
                        "minItems": 2,
                        "items": {
                            "type": "object",
                            "required": ["n_i", "var_sz", "mean_sx"],
                            "additionalProperties": False,
                            "properties": {
                                "n_i": {"type": "integer", "minimum": 1},
                                "var_sz": {"type": "number", "minimum": 0},
                                "mean_sx": _NUMBER,
                                "var_sy": {"type": "number", "minimum": 0},
                                "cov_sz": _PAIRS,
                                "cov_sy": _PAIRS,
                            },
                        },
                    },
                },
            },
        }
    },
}


class InputError(Exception):
    """Bad input file; the message is the diagnostic shown to the user."""


def _field_path(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else part)
    return out or "<root>"


def load_records(path: str) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    errors = sorted(jsonschema.Draft7Validator(RECORD_SCHEMA).iter_errors(doc),
                    key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        lines = [f"{path}: {_field_path(e.absolute_path)}: {e.message}" for e in errors]
        raise InputError("\n".join(lines))
    return doc["records"]


def _covariance(modes: list, var_key: str, cov_key: str, where: str):
    size = len(modes)
    if any(var_key not in md for md in modes):
        if any(var_key in md or cov_key in md for md in modes):
            raise InputError(f"{where}: {var_key} must be given for all modes or none")
        return None
    c = np.zeros((size, size))
    seen = {}
    for i, md in enumerate(modes):
        c[i, i] = md[var_key]
        for j, value in md.get(cov_key, []):
            if j >= size or j == i:
                raise InputError(f"{where}.modes[{i}].{cov_key}: bad mode index {j}")
            key = (min(i, j), max(i, j))
            if key in seen and not math.isclose(seen[key], value, rel_tol=1e-12, abs_tol=1e-15):
                raise InputError(f"{where}.modes[{i}].{cov_key}: covariance with mode {j} "
                                 f"disagrees with the value given on mode {j}")
            seen[key] = value
            c[i, j] = c[j, i] = value
    return c


def parse_record(rec: dict, index: int):
    """Turn one validated record into witness inputs."""
    where = f"records[{index}]"
    try:
        cm = CollectiveMoments(rec["n"], rec["var_sz"], rec["mean_sx"])
    except SpinSqueezeError as exc:
        raise InputError(f"{where}: {exc}") from exc
    mm = None
    modes = rec.get("m")
    if "modes" in rec:
        md = rec["modes"]
        total = sum(x["n_i"] for x in md)
        if total != rec["n"]:
            raise InputError(f"{where}.modes: n_i sum to {total}, expected n = {rec['n']}")
        if modes is not None and modes != len(md):
            raise InputError(f"{where}.m: m = {modes} but {len(md)} modes given")
        try:
            mm = ModeMomentSet(
                n_particles=rec["n"],
                pi=[x["n_i"] / rec["n"] for x in md],
                mean_sx=[x["mean_sx"] for x in md],
                cov_sz=_covariance(md, "var_sz", "cov_sz", where),
                cov_sy=_covariance(md, "var_sy", "cov_sy", where),
            )
        except SpinSqueezeError as exc:
            raise InputError(f"{where}.modes: {exc}") from exc
    return cm, mm, modes


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def format_text(rec: dict, rep: dict, index: int) -> str:
    head = f"record {index}" + (f" ({rec['label']})" if "label" in rec else "")
    lines = [head]
    xi = rep["xi2"]
    if xi == "undefined":
        lines.append("  xi2                      undefined (no polarization, no detection)")
    else:
        lines.append(f"  xi2                      {_fmt(xi)} ({_fmt(rep['xi2_db'])} dB)")
    for key in ("depth_state_independent", "depth_fisher", "depth_sm", "modes",
                "mode_insep_k", "max_entangled_modes", "g2", "r2"):
        lines.append(f"  {key:<24} {_fmt(rep[key])}")
    for k, v in rep["gk2"].items():
        lines.append(f"  {f'gk2[k={k}]':<24} {_fmt(v)}")
    for name, flag in rep["steering"].items():
        lines.append(f"  steering {name:<15} {'yes' if flag else 'no'}")
    for name, v in rep["thresholds"]:
        lines.append(f"  threshold {name:<14} {_fmt(v)}")
    for name, msg in rep["errors"].items():
        lines.append(f"  error {name}: {msg}")
    return "\n".join(lines)


def cmd_witness(args) -> int:
    try:
        records = load_records(args.input)
        parsed = [parse_record(rec, i) for i, rec in enumerate(records)]
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    reports = [build_report(cm, mm, modes).as_dict() for cm, mm, modes in parsed]
    if args.format == "json":
        out = [{"input": rec, **rep} for rec, rep in zip(records, reports)]
        json.dump({"reports": out}, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print("\n\n".join(format_text(rec, rep, i) for i, (rec, rep) in enumerate(zip(records, reports))))
    failed = any(msg.startswith(NUMERIC_ERRORS) for rep in reports for msg in rep["errors"].values())
    return EXIT_NUMERIC if failed else EXIT_OK


def _csv_writer(path):
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def _g17(v: float) -> str:
    return "%.17g" % v


def cmd_fs_curve(args) -> int:
    try:
        table = build_fs_table(SpinLength(args.spin), args.points)
    except NonConvergence as exc:
        print(f"table build failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    rows = sorted(table.samples, key=lambda s: s[1])
    fh, w = _csv_writer(args.out)
    try:
        w.writerow(["lambda", "x", "f"])
        for row in rows:
            w.writerow([_g17(v) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_bounds(args) -> int:
    fh, w = _csv_writer(args.out)
    try:
        if args.modes:
            w.writerow(["M", "k", "threshold"])
            for m in args.modes:
                for k in range(2, m + 1):
                    w.writerow([m, k, _g17(mode_threshold(m, k))])
        else:
            n = args.depth
            head = ["p", "fisher", "tight"] + (["x", "sm_bound"] if args.polarization_grid else [])
            w.writerow(head)
            for p in range(1, args.pmax + 1):
                base = [p, _g17(1.0 / p), _g17(depth_bound_state_independent(n, p))]
                if not args.polarization_grid:
                    w.writerow(base)
                    continue
                for x in POLARIZATION_GRID:
                    w.writerow(base + [_g17(x), _g17(sm_xi2_bound(p, x))])
    except NonConvergence as exc:
        print(f"bound evaluation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_split_check(args) -> int:
    spin = SpinLength(args.spin)
    try:
        _, parent = ground_state(build_hamiltonian(args.lam, spin))
        res = equivalence_check(parent, args.modes, strict=False)
    except DegenerateInput as exc:
        print(f"FAIL: unpolarized parent ({exc})", file=sys.stderr)
        return EXIT_NUMERIC
    except (NonConvergence, ConsistencyError) as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"S = {spin}, lambda = {args.lam:g}, M = {args.modes}")
    print(f"xi2 = {res.xi2:.17g}")
    print(f"g2  = {res.g2:.17g}")
    print(f"r2  = {res.r2:.17g}")
    for k, v in res.gk2.items():
        print(f"gk2[k={k}] = {v:.17g}")
    for name, value, expected, ok in res.checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.17g} vs {expected:.17g}")
    print("PASS" if res.passed else "FAIL")
    return EXIT_OK if res.passed else EXIT_NUMERIC


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinsqueeze",
                                description="Spin-squeezing entanglement witnesses and bound tables.")
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("witness", help="evaluate witnesses for measured moments")
    w.add_argument("input", help="JSON file with a top-level 'records' list")
    w.add_argument("--format", choices=("text", "json"), default="text")
    w.set_defaults(func=cmd_witness)

    f = sub.add_parser("fs-curve", help="tabulate F_S[x] as CSV")
    f.add_argument("--spin", type=int, required=True, metavar="2S", help="twice the spin length")
    f.add_argument("--points", type=int, default=512, help="number of lambda samples (>= 16)")
    f.add_argument("--out", help="output CSV path (default stdout)")
    f.set_defaults(func=cmd_fs_curve)

    b = sub.add_parser("bounds", help="threshold tables for modes or entanglement depth")
    grp = b.add_mutually_exclusive_group(required=True)
    grp.add_argument("--modes", type=int, nargs="+", metavar="M")
    grp.add_argument("--depth", type=int, metavar="N")
    b.add_argument("--pmax", type=int, metavar="P")
    b.add_argument("--polarization-grid", action="store_true",
                   help="add the polarization-dependent bound on a fixed x grid")
    b.add_argument("--out", help="output CSV path (default stdout)")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("split-check", help="check mode/particle identities for a split ground state")
    s.add_argument("--spin", type=int, required=True, metavar="2S")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--modes", type=int, default=2, metavar="M")
    s.set_defaults(func=cmd_split_check)
    return p


def _validate(parser, args):
    cmd = args.command
    if cmd in ("fs-curve", "split-check") and args.spin < 1:
        parser.error("--spin (2S) must be >= 1")
    if cmd == "fs-curve" and args.points < MIN_POINTS:
        parser.error(f"--points must be >= {MIN_POINTS}")
    if cmd == "bounds":
        if args.modes and any(m < 2 for m in args.modes):
            parser.error("--modes values must be >= 2")
        if args.depth is not None:
            if args.depth < 1 or args.pmax is None or not 1 <= args.pmax <= args.depth:
                parser.error("--depth N needs --pmax P with 1 <= P <= N")
        elif args.pmax is not None or args.polarization_grid:
            parser.error("--pmax and --polarization-grid go with --depth")
    if cmd == "split-check":
        if args.spin < 2:
            parser.error("--spin (2S) must be >= 2 to split particles")
        if not 2 <= args.modes <= MAX_ENUMERATION_MODES:
            parser.error(f"--modes must lie in [2, {MAX_ENUMERATION_MODES}]")
        if not math.isfinite(args.lam):
            parser.error("--lambda must be finite")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

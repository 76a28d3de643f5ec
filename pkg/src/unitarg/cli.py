"""Command-line front end.

Exit codes: 0 pass, 2 bound violation, 3 precondition failure under --strict,
4 configuration or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .bounds import theorem1_check, theorem2_check
from .core import (
    ToleranceProfile,
    UnitargError,
    load_matrix,
    matrix_to_json_obj,
)
from .eig import eig_unitary
from .harness import CHECKS, SCHEMA_VERSION, ConfigInvalid, TrialCampaign, replay, run_campaign
from .numrange import SpreadPreconditionViolated, minmax_verify
from .sampling import CASES, KINDS, SampleSpec, draw_pair, equality_pair, trial_rng
from .spectral import fractional_power

EXIT_OK, EXIT_VIOLATION, EXIT_PRECONDITION, EXIT_CONFIG = 0, 2, 3, 4


class _Exit(Exception):
    def __init__(self, code: int, msg: str = ""):
        super().__init__(msg)
        self.code = code


def _profile(args, n: int) -> ToleranceProfile:
    if not args.profile:
        return ToleranceProfile.for_dim(n)
    with open(args.profile) as fh:
        return ToleranceProfile.from_dict(json.load(fh))


def _csv_rows(obj) -> list[dict]:
    if isinstance(obj, dict) and "re" in obj and "im" in obj:
        n = obj["n"]
        return [{**{f"re{c}": obj["re"][r][c] for c in range(n)},
                 **{f"im{c}": obj["im"][r][c] for c in range(n)}} for r in range(n)]
    for key in ("rows", "reports", "checks_rows"):
        if isinstance(obj, dict) and key in obj:
            return [{k: (json.dumps(v) if isinstance(v, (list, dict)) else v)
                     for k, v in row.items()} for row in obj[key]]
    return [{k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in obj.items()}]


def _emit(args, obj) -> None:
    if args.format == "csv":
        rows = _csv_rows(obj)
        buf = io.StringIO()
        fieldnames = list(dict.fromkeys(k for row in rows for k in row))
        w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_decompose(args) -> int:
    u = load_matrix(args.matrix, None if not args.profile else _profile(args, 1))
    profile = _profile(args, u.dim)
    s = eig_unitary(u, profile)
    n = s.n
    obj = {
        "schema": SCHEMA_VERSION,
        "n": n,
        "angles": s.angles.tolist(),
        "descending": s.desc.tolist(),
        "ascending": s.asc.tolist(),
        "absolute_descending": s.absdesc.tolist(),
        "clusters": [[i + 1 for i in c] for c in s.clusters],
        "recon_defect": s.recon_defect,
        "rows": [{"j": j + 1, "descending": float(s.desc[j]), "ascending": float(s.asc[j]),
                  "absolute_descending": float(s.absdesc[j])} for j in range(n)],
    }
    _emit(args, obj)
    return EXIT_OK


def cmd_power(args) -> int:
    u = load_matrix(args.matrix, None if not args.profile else _profile(args, 1))
    profile = _profile(args, u.dim)
    p = fractional_power(eig_unitary(u, profile), args.a, profile)
    _emit(args, matrix_to_json_obj(p.entries))
    return EXIT_OK


def cmd_check(args) -> int:
    u = load_matrix(args.u, None if not args.profile else _profile(args, 1))
    v = load_matrix(args.v, None if not args.profile else _profile(args, 1))
    profile = _profile(args, u.dim)
    reports = []
    if args.theorem in ("1", "both"):
        reports.extend(theorem1_check(u, v, profile))
    if args.theorem in ("2", "both"):
        reports.append(theorem2_check(u, v, profile))
    _emit(args, {"schema": SCHEMA_VERSION, "reports": [r.to_dict() for r in reports]})
    if any(not r.holds(profile.tol_eq) for r in reports):
        return EXIT_VIOLATION
    if args.strict and any(not r.preconditions_ok for r in reports):
        return EXIT_PRECONDITION
    return EXIT_OK


def cmd_minmax(args) -> int:
    u = load_matrix(args.matrix, None if not args.profile else _profile(args, 1))
    profile = _profile(args, u.dim)
    try:
        r = minmax_verify(u, args.j, args.trials, args.seed, profile,
                          oracle_samples=args.oracle_samples)
    except SpreadPreconditionViolated as exc:
        raise _Exit(EXIT_PRECONDITION, str(exc)) from exc
    _emit(args, {"schema": SCHEMA_VERSION, **r.to_dict()})
    return EXIT_OK if r.ok else EXIT_VIOLATION


def _parse_floats(text: str | None):
    if text is None:
        return None
    return tuple(float(eval_angle(t)) for t in text.split(",") if t.strip())


def eval_angle(token: str) -> float:
    """Parse a float, allowing a pi factor: '0.5', 'pi/2', '-pi/3', '2*pi/5'."""
    t = token.strip().lower().replace(" ", "")
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    coef = num.replace("*", "").replace("pi", "")
    c = {"": 1.0, "+": 1.0, "-": -1.0}[coef] if coef in ("", "+", "-") else float(coef)
    return c * math.pi / (float(den) if den else 1.0)


def cmd_sample(args) -> int:
    n = args.n
    profile = _profile(args, n)
    if args.kind == "equality_planted" and args.theta_u is not None:
        rng = trial_rng(args.seed, 0)
        mats = equality_pair(n, eval_angle(args.theta_u), eval_angle(args.theta_v or "0"),
                             rng, profile, case_ii=args.case == "case_ii")
    else:
        spec = SampleSpec(n=n, kind=args.kind, spectrum=_parse_floats(args.spectrum),
                          case_target=args.case, planted_gap=args.gap, seed=args.seed)
        mats = draw_pair(spec, 0, profile)
        if args.kind in ("haar", "fixed_spectrum") and not args.pair:
            mats = mats[:1]
    names = ["U", "V"]
    if args.out:
        base = Path(args.out)
        if len(mats) == 1:
            paths = [base]
        else:
            paths = [base.with_name(f"{base.stem}_{nm}{base.suffix or '.json'}") for nm in names]
        for m, p in zip(mats, paths):
            p.write_text(json.dumps(matrix_to_json_obj(m.entries)) + "\n")
            print(p)
    else:
        obj = {nm: matrix_to_json_obj(m.entries) for nm, m in zip(names, mats)}
        sys.stdout.write(json.dumps(obj if len(mats) > 1 else obj["U"]) + "\n")
    return EXIT_OK


def _campaign_from_args(args) -> TrialCampaign:
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
        if args.seed_given:
            d["seed"] = args.seed
        if args.profile:
            with open(args.profile) as fh:
                d["profile"] = json.load(fh)
        return TrialCampaign.from_dict(d)
    if args.n is None:
        raise ConfigInvalid("--n is required without --config")
    spec = SampleSpec(n=args.n, kind=args.kind, spectrum=_parse_floats(args.spectrum),
                      case_target=args.case, planted_gap=args.gap, seed=args.seed)
    profile = _profile(args, args.n) if args.profile else None
    checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
    return TrialCampaign(spec=spec, trials=getattr(args, "trials", 1), checks=checks,
                         profile=profile, seed=args.seed, minmax_trials=args.minmax_trials)


def cmd_campaign(args) -> int:
    c = _campaign_from_args(args)
    s = run_campaign(c, workers=args.workers)
    if args.timing:
        print(f"wall time {s.wall_time:.2f}s", file=sys.stderr)
    if args.format == "csv":
        rows = [{"check": k, **v} for k, v in s.to_dict()["checks"].items()]
        _emit(args, {"checks_rows": rows})
    else:
        text = s.to_json(include_timing=False) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return EXIT_VIOLATION if s.total_failures else EXIT_OK


def cmd_replay(args) -> int:
    c = _campaign_from_args(args)
    rec = replay(c, args.trial, args.check)
    _emit(args, rec)
    return EXIT_VIOLATION if rec["outcome"] == "fail" else EXIT_OK


def _common(top_level: bool) -> argparse.ArgumentParser:
    # subcommands must not overwrite flags given before the subcommand name
    dflt = (lambda v: v) if top_level else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=dflt(None), help="64-bit RNG seed (default 0)")
    p.add_argument("--profile", default=dflt(None), help="JSON file of tolerance overrides")
    p.add_argument("--out", default=dflt(None), help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=dflt("json"))
    return p


def _campaign_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="campaign JSON (spec, trials, checks, seed, profile)")
    p.add_argument("--n", type=int)
    p.add_argument("--kind", choices=KINDS, default="haar")
    p.add_argument("--spectrum", help="comma-separated angles for fixed_spectrum")
    p.add_argument("--case", choices=CASES)
    p.add_argument("--gap", type=float, help="planted principal gap (radians)")
    p.add_argument("--checks", default="T1,T2", help=f"comma-separated subset of {','.join(CHECKS)}")
    p.add_argument("--minmax-trials", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    common = _common(top_level=False)
    parser = argparse.ArgumentParser(prog="unitarg", parents=[_common(top_level=True)],
                                     description="Eigenangle bounds for products of unitaries")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="ordered eigenangles and clusters")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("power", parents=[common], help="fractional power U^a, a in [0,1]")
    p.add_argument("matrix")
    p.add_argument("--a", type=float, required=True)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("check", parents=[common], help="evaluate the product bounds for U, V")
    p.add_argument("u")
    p.add_argument("v")
    p.add_argument("--theorem", choices=("1", "2", "both"), default="both")
    p.add_argument("--strict", action="store_true", help="exit 3 when preconditions fail")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("minmax", parents=[common], help="min-max check for one index j")
    p.add_argument("matrix")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--oracle-samples", type=int, default=0)
    p.set_defaults(func=cmd_minmax)

    p = sub.add_parser("sample", parents=[common], help="write random matrices as JSON")
    p.add_argument("--kind", choices=KINDS, default="haar")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--spectrum")
    p.add_argument("--case", choices=CASES)
    p.add_argument("--gap", type=float)
    p.add_argument("--theta-u", help="top angle of U for equality_planted (accepts pi/2 etc.)")
    p.add_argument("--theta-v", help="top angle of V for equality_planted")
    p.add_argument("--pair", action="store_true", help="emit a pair for haar/fixed_spectrum")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("campaign", parents=[common], help="seeded fuzz campaign")
    _campaign_args(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="print wall time to stderr")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("replay", parents=[common], help="re-run one trial of a campaign")
    _campaign_args(p)
    p.add_argument("--trial", type=int, required=True)
    p.add_argument("--check", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (UnitargError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

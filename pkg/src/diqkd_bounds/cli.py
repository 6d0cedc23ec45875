"""Command-line entry point: ``diqkd-bounds {bounds,peres,simulate,squash,replay}``.

Each subcommand writes its data files plus a ``<subcommand>-manifest.json``
recording every parameter. ``diqkd-bounds replay MANIFEST`` reruns from a
manifest and reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .chsh import (
    AttackParams,
    depolarizing_qber,
    key_ccq_state,
    q_grid,
    s_grid,
    sweep_curve,
    theorem1_bound,
)
from .intrinsic import SquashSearchConfig, intrinsic_upper
from .peres import evidence_report
from .protocol import (
    Correlation,
    ProtocolConfig,
    attack_correlation,
    classical_correlation,
    depolarizing_correlation,
    run_protocol,
)

OUT_ENV = "DIQKD_BOUNDS_OUT"
DEVICES = ("attack", "depolarizing", "classical", "file")


def fmt(v) -> str:
    """Locale-independent CSV number formatting with 12 significant digits."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def parse_grid(text: str) -> tuple[int, int]:
    try:
        n_s, n_q = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 100x100, got {text!r}")
    if n_s < 2 or n_q < 2:
        raise argparse.ArgumentTypeError("grid resolution must be at least 2 per axis")
    return n_s, n_q


def int_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive integers")
    return values


def at_least_two(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("need at least 2 points")
    return n


# ---------------------------------------------------------------------------
# subcommands; each returns (exit status, list of output file names)


def cmd_bounds(args, out: Path) -> tuple[int, list[str]]:
    n_s, n_q = args.grid
    write_csv(out / "surface.csv", ["S", "Q", "upper"],
              ((S, Q, theorem1_bound(S, Q)) for S in s_grid(n_s) for Q in q_grid(n_q)))
    write_csv(out / "curves.csv", ["S", "lower", "entropy_rate", "upper_thm1", "upper_appB"],
              ((p.S, p.lower, p.entropy_rate, p.upper_thm1, p.upper_appB)
               for p in sweep_curve(args.points)))
    return 0, ["surface.csv", "curves.csv"]


def cmd_peres(args, out: Path) -> tuple[int, list[str]]:
    report = evidence_report(Fraction(args.q))
    name = "peres." + {"text": "txt", "csv": "csv", "json": "json"}[args.format]
    text = {"text": report.to_text, "csv": report.to_csv, "json": report.to_json}[args.format]()
    (out / name).write_text(text)
    return (0 if report.no_key() else 1), [name]


def _device(args) -> Correlation:
    if args.device == "attack":
        return attack_correlation(args.S, args.Q)
    if args.device == "depolarizing":
        return depolarizing_correlation(args.nu)
    if args.device == "classical":
        return classical_correlation()
    if args.correlation is None:
        raise ValueError("--device file needs --correlation PATH")
    return Correlation.from_csv(args.correlation)


def cmd_simulate(args, out: Path) -> tuple[int, list[str]]:
    cfg = ProtocolConfig(args.n, args.omega_exp, args.test_prob,
                         (args.key_x, args.key_y), args.seed)
    report = run_protocol(_device(args), cfg)
    name = f"simulate.{args.format}"
    (out / name).write_text(report.to_json() if args.format == "json" else report.to_csv())
    return 0, [name]


def cmd_squash(args, out: Path) -> tuple[int, list[str]]:
    rows = []
    for S in s_grid(args.points):
        rho = key_ccq_state(AttackParams(S, depolarizing_qber(S)))
        for e_out in args.e_out:
            for env in args.env:
                cfg = SquashSearchConfig(e_out, env, args.restarts, args.max_evals, args.seed)
                if e_out * env < rho.dims[2]:
                    continue
                r = intrinsic_upper(rho, cfg)
                rows.append((S, e_out, env, r.identity_value, r.search_value,
                             r.best_value, r.improvement, r.significant))
    if not rows:
        raise ValueError("no feasible (e_out, env) pair: need e_out * env >= 2")
    write_csv(out / "squash.csv", ["S", "e_out", "env", "identity_value", "search_value",
                                   "best_value", "improvement", "significant"], rows)
    return 0, ["squash.csv"]


COMMANDS = {"bounds": cmd_bounds, "peres": cmd_peres,
            "simulate": cmd_simulate, "squash": cmd_squash}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diqkd-bounds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUT_ENV} or the current directory)")

    p = sub.add_parser("bounds", help="upper/lower key-rate bounds as CSV")
    p.add_argument("--grid", type=parse_grid, default=(100, 100), help="surface grid NSxNQ")
    p.add_argument("--points", type=at_least_two, default=200, help="points on the S curve")
    common(p)

    p = sub.add_parser("peres", help="one-way rates of the bound entangled state")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--q", default="1/5", help="Alice measurement parameter q")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo run of the protocol")
    p.add_argument("--device", choices=DEVICES, default="attack")
    p.add_argument("--S", type=float, default=2 * 2 ** 0.5)
    p.add_argument("--Q", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--correlation", default=None, help="CSV with columns x,y,a,b,p")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--omega-exp", type=float, default=0.75)
    p.add_argument("--test-prob", type=float, default=0.5)
    p.add_argument("--key-x", type=int, default=0)
    p.add_argument("--key-y", type=int, default=2)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    common(p)

    p = sub.add_parser("squash", help="squashing-channel search on the key state")
    p.add_argument("--points", type=at_least_two, default=10, help="points on the S grid")
    p.add_argument("--e-out", type=int_list, default=[1, 2, 3, 4])
    p.add_argument("--env", type=int_list, default=[1, 2])
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-evals", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("replay", help="rerun from a manifest")
    p.add_argument("manifest")
    common(p)
    return parser


def _manifest_params(args) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("command", "out")}
    if "grid" in params:
        params["grid"] = "{}x{}".format(*params["grid"])
    for k in ("e_out", "env"):
        if k in params:
            params[k] = ",".join(str(v) for v in params[k])
    return params


def _argv_from_manifest(manifest: dict) -> list[str]:
    argv = [manifest["subcommand"]]
    for key, value in manifest["parameters"].items():
        if value is None:
            continue
        argv += [f"--{key.replace('_', '-') if key not in ('S', 'Q') else key}", str(value)]
    return argv


def run(args) -> int:
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    status, files = COMMANDS[args.command](args, out)
    manifest = {
        "subcommand": args.command,
        "parameters": _manifest_params(args),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "outputs": files,
    }
    (out / f"{args.command}-manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return status


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            path = Path(args.manifest)
            manifest = json.loads(path.read_text())
            replay_args = parser.parse_args(_argv_from_manifest(manifest))
            replay_args.out = args.out or str(path.parent)
            return run(replay_args)
        return run(args)
    except (OSError, ValueError) as exc:
        print(f"diqkd-bounds: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

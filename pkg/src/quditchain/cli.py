"""Command-line scans that write CSV tables.

Exit status: 0 on success, 1 on a usage error, 2 when ``verify`` finds a
failing check.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .channel import build_kraus
from .entanglement import joint_state, log_negativity_closed, log_negativity_generic
from .fidelity import (VANISHING_FIELD, Strategy, _time_grid, fidelity_curve, optimize,
                       scaling_lhs, tuned_fidelity)
from .lattice import ChainConfig, amplitude_exact, amplitude_exact_grid
from .verify import run_checks

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
MAX_VERIFY_LEVELS = 8

DEFAULTS = {
    "d_list": "2,3,4",
    "j": 1.0,
    "t_max": 400.0,
    "t_step": 0.05,
    "seed": 0,
    "out": "-",
}
COMMAND_DEFAULTS = {
    "fidelity-scan": {"distance": "20"},
    "optimal-fidelity": {"distance": "1-20"},
    "scaling-check": {"distance": "20", "d_list": "2-8", "strategy": "vanishing"},
    "entanglement-scan": {"n": 60, "sender": 1, "receiver": 30},
    "verify": {},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list[int]:
    """``"2,3,5-7"`` -> ``[2, 3, 5, 6, 7]``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise UsageError(f"empty integer list {text!r}")
    return sorted(set(out))


def read_config_file(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag spelling."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file; flags take precedence")
    common.add_argument("--n", type=int, help="ring length (default: 2 * distance)")
    common.add_argument("--distance", help="sender-receiver distance(s), e.g. 4 or 1-20")
    common.add_argument("--sender", type=int)
    common.add_argument("--receiver", type=int)
    common.add_argument("--d-list", help="level counts, e.g. 2,3,4 or 2-8")
    common.add_argument("--j", type=float, help="coupling J")
    common.add_argument("--b", type=float, help="fixed magnetic field B")
    common.add_argument("--strategy", choices=[s.value for s in Strategy])
    common.add_argument("--t-max", type=float)
    common.add_argument("--t-step", type=float)
    common.add_argument("--out", help="output path, '-' for stdout")
    common.add_argument("--seed", type=int)
    common.add_argument("--verify", action="store_true", default=None,
                        help="add the generic negativity cross-check column")
    common.add_argument("--corrupt-tolerance", action="store_true", help=argparse.SUPPRESS)

    parser = _Parser(prog="quditchain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMAND_DEFAULTS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS[args.command])
    if args.config:
        cfg.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if value is not None and key != "config":
            cfg[key] = value
    cfg["command"] = args.command
    cfg["d_list"] = parse_int_list(cfg["d_list"])
    if any(d < 2 for d in cfg["d_list"]):
        raise UsageError("level counts must be >= 2")
    for key, kind in (("j", float), ("t_max", float), ("t_step", float), ("seed", int)):
        cfg[key] = kind(cfg[key])
    for key in ("n", "sender", "receiver"):
        if cfg.get(key) is not None:
            cfg[key] = int(cfg[key])
    if cfg.get("b") is not None:
        cfg["b"] = float(cfg["b"])
    if cfg["j"] <= 0:
        raise UsageError("--j must be positive")
    if cfg["t_max"] <= 0 or cfg["t_step"] <= 0:
        raise UsageError("--t-max and --t-step must be positive")
    cfg.pop("corrupt_tolerance", None)
    return cfg


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    return str(value)


def write_csv(cfg: dict, header: list[str], rows: list[list]) -> None:
    resolved = {k: v for k, v in sorted(cfg.items()) if v is not None}
    text = [f"# config: {json.dumps(resolved, sort_keys=True)}\r\n"]
    out = _Lines()
    writer = csv.writer(out)
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text.extend(out.lines)
    payload = "".join(text)
    if cfg["out"] == "-":
        sys.stdout.write(payload)
    else:
        Path(cfg["out"]).write_text(payload, encoding="utf-8", newline="")


class _Lines:
    def __init__(self):
        self.lines = []

    def write(self, s):
        self.lines.append(s)


def _chain(cfg: dict, d: int, distance: int | None = None, field: float = 0.0) -> ChainConfig:
    try:
        if cfg.get("n") is not None and distance is None:
            n = cfg["n"]
            s = cfg.get("sender") or 0
            r = cfg["receiver"] if cfg.get("receiver") is not None else (s + n // 2) % n
            return ChainConfig(n, levels=d, coupling=cfg["j"], field=field, sender=s, receiver=r)
        return ChainConfig.half_ring(distance, levels=d, coupling=cfg["j"], field=field)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _distances(cfg: dict) -> list[int]:
    dist = parse_int_list(cfg["distance"])
    if any(x < 1 for x in dist):
        raise UsageError("distances must be >= 1")
    return dist


def cmd_fidelity_scan(cfg: dict) -> int:
    strategy = Strategy(cfg.get("strategy") or "vanishing")
    header = ["d", "distance", "t", "modulus", "phase", "field", "f_avg"]
    rows = []
    for distance in _distances(cfg):
        for d in cfg["d_list"]:
            chain = _chain(cfg, d, distance)
            times = _time_grid(cfg["t_max"], cfg["t_step"])
            f = amplitude_exact_grid(chain, times)
            if cfg.get("b") is not None or strategy is Strategy.VANISHING_FIELD:
                b = cfg["b"] if cfg.get("b") is not None else VANISHING_FIELD * cfg["j"]
                fields = np.full_like(times, b)
                values = fidelity_curve(chain, times, b)
            else:
                best = [tuned_fidelity(chain, t) for t in times]
                fields = np.array([b for b, _ in best])
                values = np.array([v for _, v in best])
            for t, a, b, v in zip(times, f, fields, values):
                rows.append([d, distance, t, abs(a), np.angle(a), b, v])
    write_csv(cfg, header, rows)
    return EXIT_OK


def cmd_optimal_fidelity(cfg: dict) -> int:
    strategies = [Strategy(cfg["strategy"])] if cfg.get("strategy") else list(Strategy)
    header = ["strategy", "d", "distance", "t_opt", "b_opt", "f_avg_opt"]
    rows = []
    for strategy in strategies:
        for d in cfg["d_list"]:
            for distance in _distances(cfg):
                res = optimize(_chain(cfg, d, distance), strategy,
                               t_max=cfg["t_max"], step=cfg["t_step"])
                rows.append([strategy.value, d, distance, res.t_opt, res.b_opt, res.f_avg_opt])
    write_csv(cfg, header, rows)
    return EXIT_OK


def cmd_scaling_check(cfg: dict) -> int:
    if len(cfg["d_list"]) < 3:
        raise UsageError("scaling-check needs at least three level counts in --d-list")
    strategy = Strategy(cfg.get("strategy") or "vanishing")
    header = ["row", "d", "distance", "f_avg_opt", "scaling_lhs", "flag"]
    rows = []
    for distance in _distances(cfg):
        lhs = []
        for d in cfg["d_list"]:
            res = optimize(_chain(cfg, d, distance), strategy, t_max=cfg["t_max"], step=cfg["t_step"])
            try:
                value, flag = scaling_lhs(res.f_avg_opt, d), "ok"
                lhs.append(value)
            except ValueError:
                value, flag = float("nan"), "negative-radicand"
            rows.append(["point", d, distance, res.f_avg_opt, value, flag])
        spread = max(lhs) - min(lhs) if lhs else float("nan")
        rows.append(["spread", 0, distance, float("nan"), spread, "ok" if lhs else "no-data"])
    write_csv(cfg, header, rows)
    return EXIT_OK


def cmd_entanglement_scan(cfg: dict) -> int:
    check = bool(cfg.get("verify"))
    if check and max(cfg["d_list"]) > MAX_VERIFY_LEVELS:
        raise UsageError(f"--verify supports d <= {MAX_VERIFY_LEVELS}")
    header = ["d", "t", "ln_value", "efficiency"]
    if check:
        header += ["ln_generic", "abs_diff"]
    rows = []
    times = np.concatenate(([0.0], _time_grid(cfg["t_max"], cfg["t_step"])))
    for d in cfg["d_list"]:
        chain = _chain(cfg, d)
        for t in times:
            amp = amplitude_exact(chain, t)
            res = log_negativity_closed(amp, d)
            row = [d, t, res.ln_value, res.efficiency]
            if check:
                generic = log_negativity_generic(joint_state(build_kraus(amp, d, 0.0)), d, d)
                row += [generic, abs(generic - res.ln_value)]
            rows.append(row)
    write_csv(cfg, header, rows)
    return EXIT_OK


def cmd_verify(cfg: dict, corrupt: bool = False) -> int:
    checks = run_checks(seed=cfg["seed"], corrupt=corrupt)
    lines = [c.line() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed (seed={cfg['seed']})")
    text = "\n".join(lines) + "\n"
    if cfg["out"] == "-":
        sys.stdout.write(text)
    else:
        Path(cfg["out"]).write_text(text, encoding="utf-8")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {
    "fidelity-scan": cmd_fidelity_scan,
    "optimal-fidelity": cmd_optimal_fidelity,
    "scaling-check": cmd_scaling_check,
    "entanglement-scan": cmd_entanglement_scan,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command == "verify":
            return cmd_verify(cfg, corrupt=args.corrupt_tolerance)
        return COMMANDS[args.command](cfg)
    except (UsageError, ValueError, OSError) as exc:
        print(f"quditchain {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

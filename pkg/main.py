# main.py

import argparse
import logging
import sys
from pathlib import Path

import yaml
from pydantic import ValidationError

from checks.coordinator import Coordinator
from checks.models import COMMANDS, RunConfig
from checks.suites import CHECKS
from propagators.errors import AscentError
from utils.config import default_config_path, env_overrides
from utils.serialization import dumps, write_json

# Load environment variables from .env file
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

logger = logging.getLogger("ascent")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# flag name -> RunConfig field
_FLAGS = {
    "t": float, "tol": float, "level": int, "m0": int, "m_cap": int, "grid": int, "length": float,
    "sigma": float, "a": float, "dim": int, "seed": int, "threads": int, "fixture": str,
    "output_dir": str, "out": str, "samples": int, "kind": str, "count": int, "size": int,
    "rule_kind": str, "parity": str, "q": int,
}
# extra spellings accepted on the command line
_ALIASES = {"m_cap": ["--mcap"]}


def load_config(config_path, command: str) -> dict:
    """Load defaults from YAML, apply the command's section, then environment overrides."""
    with open(config_path, 'r') as file:
        config = yaml.safe_load(file) or {}

    merged = dict(config.get("defaults", {}))
    merged.update((config.get("commands", {}) or {}).get(command, {}) or {})

    # Override with environment variables if they exist
    merged.update(env_overrides())
    return merged


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="YAML defaults (configs/config.yaml)")
    common.add_argument("--log-level", default=argparse.SUPPRESS, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    for name, kind in _FLAGS.items():
        flag = "--" + name.replace("_", "-")
        if name == "out":
            common.add_argument(flag, choices=["csv", "json"], default=argparse.SUPPRESS)
        elif name == "kind":
            common.add_argument(flag, choices=["pair", "diagonal", "commuting"], default=argparse.SUPPRESS)
        elif name == "rule_kind":
            common.add_argument(flag, choices=["ball", "sphere"], default=argparse.SUPPRESS)
        elif name == "parity":
            common.add_argument(flag, choices=["even", "odd"], default=argparse.SUPPRESS)
        else:
            common.add_argument(flag, *_ALIASES.get(name, []), dest=name, type=kind, default=argparse.SUPPRESS)
    common.add_argument("--values", type=float, nargs="+", default=argparse.SUPPRESS, help="scalar family for `ascent`")
    common.add_argument("--checks", nargs="+", default=argparse.SUPPRESS, help="subset of the acceptance suite")
    common.add_argument("--quick", action="store_true", default=argparse.SUPPRESS, help="skip the slow grid-scale checks")
    common.add_argument("--richardson", action="store_true", default=argparse.SUPPRESS, help="extrapolate 2F_2m − F_m in `noncomm`")

    parser = argparse.ArgumentParser(
        prog="ascent",
        description="Operator wave propagators cos(t√(ΣAᵢ²)) by the method of ascent.",
        parents=[common],
    )
    parser.add_argument("--list-checks", action="store_true", help="enumerate the acceptance suite and exit")
    sub = parser.add_subparsers(dest="command")
    helps = {
        "verify": "run the acceptance suite",
        "ascent": "commuting-family cosine by ball/sphere quadrature",
        "noncomm": "non-commutative series limit on a fixture pair, or on --q seeded random operators",
        "wave": "ascent kernel for the grid dimension (1-3)",
        "wave2d": "disk-average wave formula on a 2-D grid",
        "wave3d": "sphere-average wave formula on a 3-D grid",
        "kg": "Klein–Gordon kernel",
        "damped": "damped-wave continuation of the Klein–Gordon kernel",
        "oscillator": "harmonic oscillator by the series limit",
        "grushin": "Grushin sum of squares by the series limit",
        "fixture": "write a seeded random fixture",
        "rule": "export a ball or sphere rule as CSV",
    }
    for command in COMMANDS:
        sub.add_parser(command, parents=[common], help=helps[command])
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    merged = load_config(getattr(args, "config", default_config_path()), args.command)
    for name in list(_FLAGS) + ["values", "checks"]:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    for name in ("quick", "richardson"):
        if getattr(args, name, False):
            merged[name] = True
    merged["command"] = args.command
    return RunConfig(**merged)


def list_checks() -> str:
    lines = []
    for check in CHECKS.values():
        flag = " [slow]" if check.slow else ""
        lines.append(f"{check.name:<22} {check.formula:<30} {check.summary}{flag}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(args, "log_level", "INFO"), format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    if args.list_checks:
        print(list_checks())
        return EXIT_PASS
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        config = run_config(args)
    except ValidationError as exc:
        for err in exc.errors():
            where = ".".join(str(p) for p in err["loc"])
            print(f"usage error: --{where.replace('_', '-')}: {err['msg']}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, yaml.YAMLError, RuntimeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        report = Coordinator(config).run()
    except AscentError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    output_path = write_json(Path(config.output_dir) / f"report_{config.command}.json", report.model_dump())
    for warning in report.warnings:
        logger.warning(warning)
    for failure in report.failures():
        logger.error("check failed: %s (%s) = %.3e vs %.1e", failure.name, failure.formula, failure.value, failure.tolerance)
    sys.stdout.write(dumps(report.model_dump()))
    logger.info("Report saved to %s", output_path)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Command line: ``rigidlab run CONFIG``, ``rigidlab validate CONFIG``, ``rigidlab demo NAME``.

Exit status 0 on success, 1 when the experiment fails, 2 for configuration problems.
Failures print one JSON error record on stderr.
"""

import argparse
import json
import sys
from pathlib import Path

from .config import validate_config
from .errors import ConfigError, RigidLabError
from .experiments import run_experiment
from .export import _plain

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def demo_dir():
    """Bundled example configs (``docs/configs`` next to the source tree)."""
    return Path(__file__).resolve().parents[2] / "docs" / "configs"


def demo_names():
    d = demo_dir()
    return sorted(p.stem for p in d.glob("*.toml")) if d.is_dir() else []


def _error_record(err):
    rec = {"error": type(err).__name__, "message": str(err.args[0]) if err.args else str(err)}
    if isinstance(err, ConfigError):
        rec["errors"] = list(err.errors)
    elif isinstance(err, RigidLabError):
        rec["context"] = _plain(err.context)
    return json.dumps(rec, sort_keys=True, default=repr)


def _load(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None
    return validate_config(text)


def _run(path, output_dir):
    cfg = _load(path)
    for p in run_experiment(cfg, output_dir):
        print(p)
    return EXIT_OK


def main(argv=None):
    ap = argparse.ArgumentParser(prog="rigidlab", description="Rigidity experiments for planar point processes.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a TOML config")
    r.add_argument("config")
    r.add_argument("-o", "--output-dir", help="override [experiment] output_dir")
    v = sub.add_parser("validate", help="check a config and report every problem")
    v.add_argument("config")
    d = sub.add_parser("demo", help="run a bundled example config")
    d.add_argument("name", nargs="?", help="config name; omit to list them")
    d.add_argument("-o", "--output-dir")
    args = ap.parse_args(argv)

    try:
        if args.command == "validate":
            cfg = _load(args.config)
            print(f"ok: {cfg.kind}")
            return EXIT_OK
        if args.command == "run":
            return _run(args.config, args.output_dir)
        if not args.name:
            print("\n".join(demo_names()))
            return EXIT_OK
        path = demo_dir() / f"{args.name}.toml"
        if not path.is_file():
            raise ConfigError([f"no bundled config named {args.name!r}; available: {', '.join(demo_names())}"])
        return _run(path, args.output_dir)
    except ConfigError as err:
        print(_error_record(err), file=sys.stderr)
        return EXIT_CONFIG
    except RigidLabError as err:
        print(_error_record(err), file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

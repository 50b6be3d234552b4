"""Command-line interface: check, extract, infer, and serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from wac.conformance import CheckConfig
from wac.engine import check_sources, extract_sources, load_database
from wac.extraction import request_to_json
from wac.flow import AnalysisConfig
from wac.inference import InferenceConfig, emit_spec_document, infer_specs, read_log

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wac", description="Check web API requests in JavaScript against API specifications."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check source files against specs")
    check.add_argument("paths", nargs="+", type=Path, help="JavaScript source files")
    check.add_argument("--spec-dir", type=Path, default=None, help="directory of spec JSON files (default: $WAC_SPEC_DIR)")
    check.add_argument("--format", choices=("text", "json"), default="text")
    check.add_argument("--symbolic-multiseg", action="store_true", help="let a trailing symbolic segment match several template segments")
    check.add_argument("--max-call-depth", type=int, default=None, metavar="K", help="interprocedural analysis depth cap")

    extract = sub.add_parser("extract", help="dump extracted requests")
    extract.add_argument("paths", nargs="+", type=Path)
    extract.add_argument("--format", choices=("json",), default="json")
    extract.add_argument("--max-call-depth", type=int, default=None, metavar="K")

    infer = sub.add_parser("infer", help="infer specs from a request log")
    infer.add_argument("--log", type=Path, required=True, help="JSON Lines request log")
    infer.add_argument("-o", "--out", type=Path, required=True, help="output directory for spec files")
    infer.add_argument("--collapse-threshold", type=int, default=3, metavar="N")

    serve = sub.add_parser("serve", help="run the HTTP check service")
    serve.add_argument("--port", type=int, default=8787)
    serve.add_argument("--spec-dir", type=Path, default=None)
    serve.add_argument("--host", default="127.0.0.1", help="bind address (loopback unless overridden)")

    return parser


def _resolve_spec_dir(parser: argparse.ArgumentParser, given: Optional[Path]) -> Path:
    if given is not None:
        return given
    env = os.environ.get("WAC_SPEC_DIR")
    if env:
        return Path(env)
    parser.error("--spec-dir is required (or set WAC_SPEC_DIR)")
    raise AssertionError("unreachable")


def _load_db(spec_dir: Path):
    if not spec_dir.is_dir():
        print(f"wac: spec directory not readable: {spec_dir}", file=sys.stderr)
        return None
    db, errors = load_database(spec_dir)
    for message in errors:
        print(f"wac: warning: {message}", file=sys.stderr)
    if not db.specs:
        print(f"wac: no loadable specs in {spec_dir}", file=sys.stderr)
        return None
    return db


def _flow_config(max_call_depth: Optional[int]) -> AnalysisConfig:
    if max_call_depth is None:
        return AnalysisConfig()
    return AnalysisConfig(max_call_depth=max(0, max_call_depth))


def _read_sources(paths: list[Path]) -> Optional[list[tuple[str, str]]]:
    sources = []
    for path in paths:
        try:
            sources.append((str(path), path.read_text(encoding="utf-8")))
        except OSError as exc:
            print(f"wac: cannot read {path}: {exc}", file=sys.stderr)
            return None
    return sources


def cmd_check(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    spec_dir = _resolve_spec_dir(parser, args.spec_dir)
    db = _load_db(spec_dir)
    if db is None:
        return EXIT_USAGE
    sources = _read_sources(args.paths)
    if sources is None:
        return EXIT_USAGE
    check_cfg = CheckConfig(multi_segment_params=args.symbolic_multiseg)
    result = check_sources(sources, db, _flow_config(args.max_call_depth), check_cfg)
    if args.format == "json":
        print(json.dumps([d.to_json() for d in result.diagnostics], indent=2, sort_keys=True))
    else:
        for diagnostic in result.diagnostics:
            print(diagnostic.to_text())
    return EXIT_ERRORS if result.error_count else EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    sources = _read_sources(args.paths)
    if sources is None:
        return EXIT_USAGE
    result = extract_sources(sources, _flow_config(args.max_call_depth))
    for diagnostic in result.diagnostics:
        print(f"wac: {diagnostic.to_text()}", file=sys.stderr)
    print(json.dumps([request_to_json(r) for r in result.requests], indent=2, sort_keys=True))
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    try:
        lines = args.log.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"wac: cannot read log {args.log}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = InferenceConfig(collapse_threshold=args.collapse_threshold)
    except ValueError as exc:
        print(f"wac: {exc}", file=sys.stderr)
        return EXIT_USAGE
    observations, skipped = read_log(lines)
    for lineno, reason in skipped:
        print(f"wac: skipped line {lineno}: {reason}", file=sys.stderr)
    if not observations:
        print("wac: log contains no usable observations", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"wac: cannot create {args.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for spec in infer_specs(observations, cfg):
        target = args.out / f"{spec.id}.json"
        target.write_text(emit_spec_document(spec), encoding="utf-8")
        print(str(target))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    spec_dir = _resolve_spec_dir(parser, args.spec_dir)
    db = _load_db(spec_dir)
    if db is None:
        return EXIT_USAGE
    import uvicorn

    from wac.service import create_app

    app = create_app(db)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"wac: cannot serve on {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check":
        return cmd_check(args, parser)
    if args.command == "extract":
        return cmd_extract(args)
    if args.command == "infer":
        return cmd_infer(args)
    return cmd_serve(args, parser)


def entrypoint() -> None:
    raise SystemExit(main())

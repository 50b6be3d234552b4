"""End-to-end pipeline: parse sources, run the flow analysis, extract
requests, and check them against a specification database.

Functions declared in one file are visible to calls in another, so
multi-file inputs analyze as one program; each file still gets its own
top-level environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from wac.conformance import (
    CODE_PARSE_WARNING,
    CheckConfig,
    DEFAULT_CHECK_CONFIG,
    Diagnostic,
    Severity,
    check_request,
)
from wac.extraction import ExtractedRequest, extract_requests
from wac.flow import AnalysisConfig, DEFAULT_CONFIG, analyze_program
from wac.js import nodes as js
from wac.js.parser import parse
from wac.specs import SpecDatabase, SpecError, load_spec_file


@dataclass
class EngineResult:
    requests: list[ExtractedRequest] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def error_count(self) -> int:
        return sum(1 for d in self.diagnostics if d.severity is Severity.ERROR)


def load_database(spec_dir: Path) -> tuple[SpecDatabase, list[str]]:
    """Load every *.json under spec_dir; returns (db, per-file errors)."""
    errors: list[str] = []
    specs = []
    ids: set[str] = set()
    for path in sorted(spec_dir.glob("*.json")):
        try:
            spec = load_spec_file(path)
        except (SpecError, ValueError, OSError) as exc:
            errors.append(f"{path}: {exc}")
            continue
        if spec.id in ids:
            errors.append(f"{path}: duplicate spec id '{spec.id}'")
            continue
        ids.add(spec.id)
        specs.append(spec)
    return SpecDatabase(specs), errors


def _parse_sources(
    sources: list[tuple[str, str]],
) -> tuple[list[tuple[str, js.Program]], list[Diagnostic]]:
    """Parse each (name, text) source; parse errors become warnings."""
    programs: list[tuple[str, js.Program]] = []
    warnings: list[Diagnostic] = []
    for name, text in sorted(sources, key=lambda pair: pair[0]):
        result = parse(text, name)
        programs.append((name, result.program))
        for err in result.errors:
            warnings.append(
                Diagnostic(
                    severity=Severity.WARNING,
                    code=CODE_PARSE_WARNING,
                    message=err.message,
                    span=err.span,
                    stage=None,
                )
            )
    return programs, warnings


def _cross_file_functions(
    programs: list[tuple[str, js.Program]], own: str
) -> list[js.FunctionDecl]:
    """Top-level function declarations from every other file."""
    seen: set[str] = set()
    extras: list[js.FunctionDecl] = []
    for name, program in programs:
        if name == own:
            continue
        for stmt in program.body:
            if isinstance(stmt, js.FunctionDecl) and stmt.name not in seen:
                seen.add(stmt.name)
                extras.append(stmt)
    return extras


def extract_sources(
    sources: list[tuple[str, str]],
    flow_cfg: AnalysisConfig = DEFAULT_CONFIG,
) -> EngineResult:
    """Parse and extract requests; no conformance checking."""
    result = EngineResult()
    programs, warnings = _parse_sources(sources)
    result.diagnostics.extend(warnings)
    for name, program in programs:
        flow = analyze_program(
            program, flow_cfg, extra_functions=_cross_file_functions(programs, name)
        )
        result.requests.extend(extract_requests(program, flow))
    _sort_diagnostics(result.diagnostics)
    return result


def check_sources(
    sources: list[tuple[str, str]],
    db: SpecDatabase,
    flow_cfg: AnalysisConfig = DEFAULT_CONFIG,
    check_cfg: CheckConfig = DEFAULT_CHECK_CONFIG,
) -> EngineResult:
    """Full pipeline over (name, text) sources."""
    result = extract_sources(sources, flow_cfg)
    for request in result.requests:
        result.diagnostics.extend(check_request(request, db, check_cfg))
    _sort_diagnostics(result.diagnostics)
    return result


def check_files(
    paths: list[Path],
    db: SpecDatabase,
    flow_cfg: AnalysisConfig = DEFAULT_CONFIG,
    check_cfg: CheckConfig = DEFAULT_CHECK_CONFIG,
) -> EngineResult:
    sources = [(str(path), path.read_text(encoding="utf-8")) for path in paths]
    return check_sources(sources, db, flow_cfg, check_cfg)


def _sort_diagnostics(diagnostics: list[Diagnostic]) -> None:
    diagnostics.sort(
        key=lambda d: (
            d.span.file,
            d.span.start_line,
            d.span.start_col,
            d.code,
            d.message,
        )
    )

"""Staged conformance checking of extracted requests against specs.

The checker is conservative: a request produces an Error only when no
(specification, endpoint) pair matches at all, and anything the
analysis could not resolve (symbolic scheme, method, query names)
passes the corresponding stage.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from wac.extraction import (
    ExtractedRequest,
    PatternSegment,
    PayloadKind,
    UrlParts,
    UrlScheme,
    parse_url_pattern,
)
from wac.flow import Literal, Symbolic
from wac.js.nodes import SourceSpan
from wac.specs import ApiSpecification, Endpoint, Fixed, Param, PathTemplate, SpecDatabase


class CheckStage(Enum):
    HOST_LOOKUP = "HostLookup"
    PROTOCOL = "Protocol"
    BASE_PATH = "BasePath"
    ROUTE = "Route"
    METHOD = "Method"
    QUERY_PARAMS = "QueryParams"
    PAYLOAD = "Payload"


_STAGE_ORDER = {stage: i for i, stage in enumerate(CheckStage)}

_STAGE_CODES = {
    CheckStage.PROTOCOL: "WAC001",
    CheckStage.BASE_PATH: "WAC002",
    CheckStage.ROUTE: "WAC002",
    CheckStage.METHOD: "WAC003",
    CheckStage.QUERY_PARAMS: "WAC004",
    CheckStage.PAYLOAD: "WAC005",
}

CODE_UNKNOWN_HOST = "WAC100"
CODE_PARSE_WARNING = "WAC900"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class CandidateRef:
    spec: str
    method: str
    path: str

    def sort_key(self) -> tuple[str, str, str]:
        return (self.spec, self.path, self.method)


@dataclass
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan
    stage: Optional[CheckStage]
    candidates: list[CandidateRef] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "file": self.span.file,
            "line": self.span.start_line,
            "col": self.span.start_col,
            "endLine": self.span.end_line,
            "endCol": self.span.end_col,
            "severity": self.severity.value,
            "code": self.code,
            "stage": self.stage.value if self.stage is not None else None,
            "message": self.message,
            "candidates": [
                {"spec": c.spec, "method": c.method, "path": c.path}
                for c in self.candidates
            ],
        }

    def to_text(self) -> str:
        return f"{self.span}: {self.severity.value}[{self.code}]: {self.message}"


@dataclass(frozen=True)
class CheckConfig:
    multi_segment_params: bool = False
    max_candidates: int = 5


DEFAULT_CHECK_CONFIG = CheckConfig()


def _segment_regex(segment: PatternSegment) -> re.Pattern[str]:
    out = []
    for part in segment:
        if isinstance(part, Literal):
            out.append(re.escape(part.text))
        else:
            out.append("[^/]+")
    return re.compile("".join(out))


def segment_matches(segment: PatternSegment, piece: Fixed | Param) -> bool:
    """One extracted segment against one template segment.

    Symbolic parts stand for one or more characters excluding '/'.
    """
    if isinstance(piece, Param):
        return len(segment) > 0
    return _segment_regex(segment).fullmatch(piece.text) is not None


def _purely_symbolic(segment: PatternSegment) -> bool:
    return len(segment) > 0 and all(isinstance(p, Symbolic) for p in segment)


def match_path(
    segments: tuple[PatternSegment, ...] | list[PatternSegment],
    template: PathTemplate,
    cfg: CheckConfig = DEFAULT_CHECK_CONFIG,
) -> bool:
    pieces = template.segments
    if len(segments) == len(pieces) and all(
        segment_matches(seg, piece) for seg, piece in zip(segments, pieces)
    ):
        return True
    if (
        cfg.multi_segment_params
        and segments
        and _purely_symbolic(segments[-1])
        and len(segments) <= len(pieces)
        and all(
            segment_matches(seg, piece)
            for seg, piece in zip(segments[:-1], pieces[: len(segments) - 1])
        )
    ):
        # The trailing symbolic segment absorbs the remaining template
        # segments (at least one).
        return True
    return False


def check_query(
    req: ExtractedRequest,
    endpoint: Endpoint,
    url_parts: Optional[UrlParts] = None,
) -> list[str]:
    """Names of required query parameters with no evidence of presence."""
    if url_parts is None and req.url is not None:
        url_parts = parse_url_pattern(req.url)
    if req.query_truncated or (url_parts is not None and url_parts.query_truncated):
        return []
    present = set(req.query_params)
    if url_parts is not None:
        present.update(url_parts.query)
    return sorted(set(endpoint.required_query_names()) - present)


def check_payload(req: ExtractedRequest, endpoint: Endpoint) -> list[str]:
    """Names of required body fields with no evidence of presence."""
    required = endpoint.required_body_fields
    if not required:
        return []
    payload = req.payload
    if payload.kind is PayloadKind.OPAQUE:
        return []
    if payload.kind is PayloadKind.NONE:
        return sorted(required)
    return sorted(required - set(payload.fields))


@dataclass
class _Candidate:
    spec: ApiSpecification
    endpoint: Endpoint
    template: PathTemplate
    reached: CheckStage

    def ref(self) -> CandidateRef:
        return CandidateRef(
            spec=self.spec.id,
            method=self.endpoint.method.value,
            path=self.template.render(),
        )


def _base_path_matches(
    segments: tuple[PatternSegment, ...], base: PathTemplate
) -> bool:
    if len(segments) < len(base.segments):
        return False
    return all(
        segment_matches(seg, piece)
        for seg, piece in zip(segments[: len(base.segments)], base.segments)
    )


def _error(
    span: SourceSpan,
    stage: CheckStage,
    message: str,
    candidates: list[_Candidate],
    cfg: CheckConfig,
) -> Diagnostic:
    refs = sorted({c.ref() for c in candidates}, key=CandidateRef.sort_key)
    return Diagnostic(
        severity=Severity.ERROR,
        code=_STAGE_CODES[stage],
        message=message,
        span=span,
        stage=stage,
        candidates=refs[: cfg.max_candidates],
    )


def check_request(
    req: ExtractedRequest,
    db: SpecDatabase,
    cfg: CheckConfig = DEFAULT_CHECK_CONFIG,
) -> list[Diagnostic]:
    if req.url is None:
        return []
    url = parse_url_pattern(req.url)
    host = url.literal_host()
    if host is None:
        return []  # relative or symbolic host: target unknowable
    specs = db.lookup_by_host(host)
    if not specs:
        return [
            Diagnostic(
                severity=Severity.INFO,
                code=CODE_UNKNOWN_HOST,
                message=f"no specification found for host '{host}'",
                span=req.span,
                stage=CheckStage.HOST_LOOKUP,
            )
        ]

    survivors: list[_Candidate] = []
    failed: list[_Candidate] = []
    for spec in specs:
        protocol_ok = url.scheme in (UrlScheme.MISSING, UrlScheme.SYMBOLIC) or (
            url.scheme.value in spec.schemes
        )
        for endpoint in spec.endpoints:
            template = spec.full_template(endpoint)
            cand = _Candidate(spec, endpoint, template, CheckStage.PROTOCOL)
            if not protocol_ok:
                failed.append(cand)
                continue
            if not match_path(url.segments, template, cfg):
                cand.reached = (
                    CheckStage.ROUTE
                    if _base_path_matches(url.segments, spec.base_path)
                    else CheckStage.BASE_PATH
                )
                failed.append(cand)
                continue
            if req.method is not None and req.method is not endpoint.method:
                cand.reached = CheckStage.METHOD
                failed.append(cand)
                continue
            cand.reached = CheckStage.METHOD
            survivors.append(cand)

    if survivors:
        query_failures: list[tuple[_Candidate, list[str]]] = []
        payload_failures: list[tuple[_Candidate, list[str]]] = []
        for cand in survivors:
            missing_query = check_query(req, cand.endpoint, url)
            if missing_query:
                cand.reached = CheckStage.QUERY_PARAMS
                query_failures.append((cand, missing_query))
                continue
            missing_fields = check_payload(req, cand.endpoint)
            if missing_fields:
                cand.reached = CheckStage.PAYLOAD
                payload_failures.append((cand, missing_fields))
                continue
            return []  # full match: the request conforms
        if payload_failures:
            missing = sorted({name for _, names in payload_failures for name in names})
            return [
                _error(
                    req.span,
                    CheckStage.PAYLOAD,
                    f"missing required body field(s): {', '.join(missing)}",
                    [c for c, _ in payload_failures],
                    cfg,
                )
            ]
        missing = sorted({name for _, names in query_failures for name in names})
        return [
            _error(
                req.span,
                CheckStage.QUERY_PARAMS,
                f"missing required query parameter(s): {', '.join(missing)}",
                [c for c, _ in query_failures],
                cfg,
            )
        ]

    if not failed:
        return []  # host known but no endpoints to compare against
    deepest = max(_STAGE_ORDER[c.reached] for c in failed)
    stage = next(s for s, i in _STAGE_ORDER.items() if i == deepest)
    at_stage = [c for c in failed if c.reached is stage]
    path = url.render_path()
    if stage is CheckStage.PROTOCOL:
        message = (
            f"protocol '{url.scheme.value}' is not allowed for host '{host}'"
        )
    elif stage is CheckStage.BASE_PATH:
        message = (
            f"path '{path}' does not match the base path of any "
            f"specification for host '{host}'"
        )
    elif stage is CheckStage.ROUTE:
        message = f"path '{path}' does not match any route for host '{host}'"
    else:
        method = req.method.value if req.method is not None else "?"
        message = f"method '{method}' is not allowed on '{path}'"
    return [_error(req.span, stage, message, at_stage, cfg)]

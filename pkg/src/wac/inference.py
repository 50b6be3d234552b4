"""Specification inference from logs of concrete HTTP requests.

Observations are grouped per host into a segment tree; sibling
segments collapse into path parameters on enough evidence (distinct
value count, or a recognizable value class such as numeric IDs and
UUIDs), and query/body requirements are those present in every
observation of an endpoint.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional
from urllib.parse import parse_qsl, urlsplit

from wac.specs import (
    ApiSpecification,
    Endpoint,
    Fixed,
    HttpMethod,
    Param,
    ParameterSpec,
    ParamLocation,
    PathTemplate,
    emit_spec,
)

_UUID_RE = re.compile(
    r"^[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}"
    r"-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}$"
)


@dataclass(frozen=True)
class InferenceConfig:
    collapse_threshold: int = 3
    value_class_collapse: bool = True

    def __post_init__(self) -> None:
        if self.collapse_threshold < 2:
            raise ValueError("collapse_threshold must be at least 2")


DEFAULT_INFERENCE_CONFIG = InferenceConfig()


@dataclass(frozen=True)
class RequestObservation:
    method: HttpMethod
    scheme: str
    host: str
    segments: tuple[str, ...]
    query_names: frozenset[str]
    body: Any = None
    status: Optional[int] = None


def parse_log_line(line: str) -> RequestObservation:
    """One JSON Lines observation; raises ValueError on anything off."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc.msg}") from None
    if not isinstance(record, dict):
        raise ValueError("observation must be a JSON object")
    method_text = record.get("method")
    if not isinstance(method_text, str):
        raise ValueError("missing or non-string 'method'")
    try:
        method = HttpMethod(method_text.upper())
    except ValueError:
        raise ValueError(f"unknown HTTP method {method_text!r}") from None
    url = record.get("url")
    if not isinstance(url, str):
        raise ValueError("missing or non-string 'url'")
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https"):
        raise ValueError(f"URL must be absolute http(s), got {url!r}")
    if not parts.hostname:
        raise ValueError(f"URL has no host: {url!r}")
    host = parts.hostname.lower()
    if parts.port is not None:
        host = f"{host}:{parts.port}"
    segments = tuple(seg for seg in parts.path.split("/") if seg)
    if any("{" in seg or "}" in seg for seg in segments):
        raise ValueError(f"path segment contains braces: {parts.path!r}")
    query_names = frozenset(
        name for name, _ in parse_qsl(parts.query, keep_blank_values=True)
    )
    status = record.get("status")
    if status is not None and not isinstance(status, int):
        raise ValueError("'status' must be an integer")
    return RequestObservation(
        method=method,
        scheme=parts.scheme,
        host=host,
        segments=segments,
        query_names=query_names,
        body=record.get("body"),
        status=status,
    )


def read_log(lines: Iterable[str]) -> tuple[list[RequestObservation], list[tuple[int, str]]]:
    """Parse a log; returns (observations, skipped (line number, reason))."""
    observations: list[RequestObservation] = []
    skipped: list[tuple[int, str]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            observations.append(parse_log_line(line))
        except ValueError as exc:
            skipped.append((lineno, str(exc)))
    return observations, skipped


# --- segment tree ---


@dataclass
class SegmentTreeNode:
    label: Optional[str] = None  # fixed text; None for root/collapsed
    param_name: Optional[str] = None  # set on collapsed nodes
    children: dict[str, "SegmentTreeNode"] = field(default_factory=dict)
    collapsed_child: Optional["SegmentTreeNode"] = None
    hits: dict[HttpMethod, list[RequestObservation]] = field(default_factory=dict)
    values: set[str] = field(default_factory=set)  # absorbed labels

    def child(self, label: str) -> "SegmentTreeNode":
        node = self.children.get(label)
        if node is None:
            node = SegmentTreeNode(label=label)
            self.children[label] = node
        return node


def _is_value_class(label: str) -> bool:
    return label.isdigit() or _UUID_RE.match(label) is not None


def _should_collapse(labels: set[str], cfg: InferenceConfig) -> bool:
    if len(labels) >= cfg.collapse_threshold:
        return True
    return (
        cfg.value_class_collapse
        and len(labels) >= 2
        and all(_is_value_class(label) for label in labels)
    )


def _singularize(label: str) -> str:
    if label.endswith("s") and len(label) > 1:
        return label[:-1]
    return label


def _param_name(parent: SegmentTreeNode, depth: int) -> str:
    source = parent.label if parent.label is not None else parent.param_name
    if source is None:
        return f"param{depth}"
    name = _singularize(source).replace("{", "").replace("}", "")
    return name or f"param{depth}"


def _absorb(into: SegmentTreeNode, other: SegmentTreeNode, depth: int, cfg: InferenceConfig) -> None:
    """Union `other` into `into` (both at the same depth), recursively."""
    for method, observations in other.hits.items():
        into.hits.setdefault(method, []).extend(observations)
    into.values |= other.values
    for label in sorted(other.children):
        child = other.children[label]
        if label in into.children:
            _absorb(into.children[label], child, depth + 1, cfg)
        else:
            into.children[label] = child
    if other.collapsed_child is not None:
        if into.collapsed_child is None:
            into.collapsed_child = other.collapsed_child
        else:
            _absorb(into.collapsed_child, other.collapsed_child, depth + 1, cfg)
    _normalize(into, depth, cfg)


def _normalize(node: SegmentTreeNode, depth: int, cfg: InferenceConfig) -> None:
    """Apply the collapse rules to node's children (at depth+1)."""
    if (
        node.children
        and node.collapsed_child is None
        and _should_collapse(set(node.children), cfg)
    ):
        node.collapsed_child = SegmentTreeNode(param_name=_param_name(node, depth + 1))
    if node.collapsed_child is not None and node.children:
        merged = node.collapsed_child
        fixed = node.children
        node.children = {}
        for label in sorted(fixed):
            merged.values.add(label)
            _absorb(merged, fixed[label], depth + 1, cfg)
        if merged.param_name is None:
            merged.param_name = _param_name(node, depth + 1)


def collapse_parameters(
    node: SegmentTreeNode, cfg: InferenceConfig = DEFAULT_INFERENCE_CONFIG, depth: int = 0
) -> SegmentTreeNode:
    """Bottom-up collapse; mutates and returns the node."""
    for child in list(node.children.values()):
        collapse_parameters(child, cfg, depth + 1)
    if node.collapsed_child is not None:
        collapse_parameters(node.collapsed_child, cfg, depth + 1)
    _normalize(node, depth, cfg)
    return node


# --- endpoint derivation ---


def _dedup_name(name: str, used: set[str]) -> str:
    candidate = name
    suffix = 2
    while candidate in used:
        candidate = f"{name}{suffix}"
        suffix += 1
    used.add(candidate)
    return candidate


def _walk_endpoints(
    node: SegmentTreeNode,
    prefix: list[Fixed | Param],
    used_names: set[str],
    out: list[tuple[tuple[Fixed | Param, ...], HttpMethod, list[RequestObservation]]],
) -> None:
    for method in sorted(node.hits, key=lambda m: m.value):
        out.append((tuple(prefix), method, node.hits[method]))
    for label in sorted(node.children):
        child = node.children[label]
        prefix.append(Fixed(label))
        _walk_endpoints(child, prefix, set(used_names), out)
        prefix.pop()
    if node.collapsed_child is not None:
        child = node.collapsed_child
        scoped = set(used_names)
        name = _dedup_name(child.param_name or "param", scoped)
        prefix.append(Param(name))
        _walk_endpoints(child, prefix, scoped, out)
        prefix.pop()


def _required_query(observations: list[RequestObservation]) -> tuple[frozenset[str], frozenset[str]]:
    """(all names seen, names present in every observation)."""
    seen: set[str] = set()
    required: Optional[set[str]] = None
    for obs in observations:
        seen |= obs.query_names
        names = set(obs.query_names)
        required = names if required is None else required & names
    return frozenset(seen), frozenset(required or set())


def _required_body_fields(observations: list[RequestObservation]) -> frozenset[str]:
    required: Optional[set[str]] = None
    for obs in observations:
        if obs.body is None:
            continue
        keys = set(obs.body) if isinstance(obs.body, dict) else set()
        required = keys if required is None else required & keys
    return frozenset(required or set())


def infer_specs(
    log: Iterable[RequestObservation],
    cfg: InferenceConfig = DEFAULT_INFERENCE_CONFIG,
) -> list[ApiSpecification]:
    """One inferred specification per observed host, sorted by id."""
    by_host: dict[str, list[RequestObservation]] = {}
    for obs in log:
        by_host.setdefault(obs.host, []).append(obs)

    specs: list[ApiSpecification] = []
    for host in sorted(by_host):
        observations = by_host[host]
        root = SegmentTreeNode()
        for obs in observations:
            node = root
            for segment in obs.segments:
                node = node.child(segment)
            node.hits.setdefault(obs.method, []).append(obs)
        collapse_parameters(root, cfg)

        raw: list[tuple[tuple[Fixed | Param, ...], HttpMethod, list[RequestObservation]]] = []
        _walk_endpoints(root, [], set(), raw)

        base_len = _common_fixed_prefix_len([segments for segments, _, _ in raw])
        base = PathTemplate(raw[0][0][:base_len]) if raw else PathTemplate(())

        endpoints = []
        for segments, method, hits in raw:
            template = PathTemplate(segments[base_len:])
            parameters = [
                ParameterSpec(piece.name, ParamLocation.PATH, required=True)
                for piece in segments
                if isinstance(piece, Param)
            ]
            seen, required = _required_query(hits)
            for name in sorted(seen):
                parameters.append(
                    ParameterSpec(name, ParamLocation.QUERY, required=name in required)
                )
            endpoints.append(
                Endpoint(
                    template=template,
                    method=method,
                    parameters=tuple(parameters),
                    required_body_fields=_required_body_fields(hits),
                )
            )

        schemes = frozenset(obs.scheme for obs in observations) or frozenset({"https"})
        specs.append(
            ApiSpecification(
                id=host.replace(":", "_"),
                title=host,
                host=host,
                base_path=base,
                schemes=schemes,
                endpoints=tuple(endpoints),
            )
        )
    return specs


def _common_fixed_prefix_len(paths: list[tuple[Fixed | Param, ...]]) -> int:
    if not paths:
        return 0
    limit = min(len(p) for p in paths)
    length = 0
    for i in range(limit):
        first = paths[0][i]
        if not isinstance(first, Fixed):
            break
        if all(
            isinstance(p[i], Fixed) and p[i].text == first.text for p in paths[1:]
        ):
            length += 1
        else:
            break
    return length


def emit_spec_document(spec: ApiSpecification) -> str:
    """Byte-deterministic JSON document for an inferred specification."""
    return json.dumps(emit_spec(spec), sort_keys=True, indent=2) + "\n"

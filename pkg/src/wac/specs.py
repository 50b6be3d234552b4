"""API specification model: path templates, endpoints, and a host-indexed database.

Specifications are loaded from a JSON subset of OpenAPI 2.0 documents
(host, basePath, schemes, info.title, paths with per-method parameter
lists).  Loaded specifications are immutable and safe to share across
checks.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path as FsPath
from typing import Any, Iterable, Iterator, Mapping


class SpecError(ValueError):
    """A specification document or path template is malformed."""


class HttpMethod(Enum):
    GET = "GET"
    POST = "POST"
    PUT = "PUT"
    PATCH = "PATCH"
    DELETE = "DELETE"
    HEAD = "HEAD"
    OPTIONS = "OPTIONS"


_METHOD_BY_KEY = {m.value.lower(): m for m in HttpMethod}


class ParamLocation(Enum):
    QUERY = "query"
    PATH = "path"
    BODY = "body"


class ValueType(Enum):
    STRING = "string"
    NUMBER = "number"
    BOOLEAN = "boolean"
    OBJECT = "object"
    ARRAY = "array"
    ANY = "any"


_TYPE_BY_KEY = {
    "string": ValueType.STRING,
    "number": ValueType.NUMBER,
    "integer": ValueType.NUMBER,
    "boolean": ValueType.BOOLEAN,
    "object": ValueType.OBJECT,
    "array": ValueType.ARRAY,
}


@dataclass(frozen=True)
class Fixed:
    """A literal path segment."""

    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise SpecError("fixed path segment must be non-empty")
        if "/" in self.text:
            raise SpecError(f"fixed path segment contains '/': {self.text!r}")
        if "{" in self.text or "}" in self.text:
            # would be ambiguous with a parameter segment when rendered
            raise SpecError(f"fixed path segment contains braces: {self.text!r}")


@dataclass(frozen=True)
class Param:
    """A templated path segment, e.g. the {tag} in /tags/{tag}/media."""

    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise SpecError("path parameter name must be non-empty")
        if "/" in self.name or "{" in self.name or "}" in self.name:
            raise SpecError(f"invalid path parameter name: {self.name!r}")


TemplateSegment = Fixed | Param


@dataclass(frozen=True)
class PathTemplate:
    """An ordered sequence of fixed and parameter segments.

    Parameter names are unique within one template.  The empty template
    renders as "/".
    """

    segments: tuple[TemplateSegment, ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for seg in self.segments:
            if isinstance(seg, Param):
                if seg.name in seen:
                    raise SpecError(f"duplicate path parameter: {seg.name!r}")
                seen.add(seg.name)

    def render(self) -> str:
        if not self.segments:
            return "/"
        parts = []
        for seg in self.segments:
            parts.append(seg.text if isinstance(seg, Fixed) else "{" + seg.name + "}")
        return "/" + "/".join(parts)

    def param_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.segments if isinstance(s, Param))

    def concat(self, other: "PathTemplate") -> "PathTemplate":
        return PathTemplate(self.segments + other.segments)


_SEGMENT_PARAM_RE = re.compile(r"^\{([^{}/]+)\}$")


def parse_path_template(text: str) -> PathTemplate:
    """Parse "/tags/{tag}/media" into a PathTemplate.

    The input must be empty or begin with "/".  One trailing slash is
    tolerated; interior empty segments are not.
    """
    if text == "":
        return PathTemplate(())
    if not text.startswith("/"):
        raise SpecError(f"path template must start with '/': {text!r}")
    body = text[1:]
    if body.endswith("/"):
        body = body[:-1]
    if body == "":
        return PathTemplate(())
    segments: list[TemplateSegment] = []
    for piece in body.split("/"):
        if piece == "":
            raise SpecError(f"empty path segment in template: {text!r}")
        if "{" in piece or "}" in piece:
            m = _SEGMENT_PARAM_RE.match(piece)
            if m is None:
                raise SpecError(
                    f"braces must span a whole segment: {piece!r} in {text!r}"
                )
            segments.append(Param(m.group(1)))
        else:
            segments.append(Fixed(piece))
    return PathTemplate(tuple(segments))


@dataclass(frozen=True)
class ParameterSpec:
    """One declared query or path parameter of an endpoint."""

    name: str
    location: ParamLocation
    required: bool = False
    value_type: ValueType = ValueType.ANY

    def __post_init__(self) -> None:
        if not self.name:
            raise SpecError("parameter name must be non-empty")
        # Path parameters are required by definition.
        if self.location is ParamLocation.PATH and not self.required:
            object.__setattr__(self, "required", True)


@dataclass(frozen=True)
class Endpoint:
    """A route template plus method, with its declared parameters.

    ``required_body_fields`` holds the top-level field names a JSON
    request body must carry; it is empty for endpoints without a body
    schema.
    """

    template: PathTemplate
    method: HttpMethod
    parameters: tuple[ParameterSpec, ...] = ()
    required_body_fields: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        ordered = tuple(
            sorted(self.parameters, key=lambda p: (p.location.value, p.name))
        )
        object.__setattr__(self, "parameters", ordered)
        declared_paths = {
            p.name for p in ordered if p.location is ParamLocation.PATH
        }
        missing = [n for n in self.template.param_names() if n not in declared_paths]
        if missing:
            raise SpecError(
                f"path parameters without a declaration: {', '.join(missing)}"
            )

    def required_query_names(self) -> tuple[str, ...]:
        return tuple(
            p.name
            for p in self.parameters
            if p.location is ParamLocation.QUERY and p.required
        )


_HOST_RE = re.compile(r"^[a-z0-9]([a-z0-9.-]*[a-z0-9])?(:[0-9]+)?$")
_SCHEMES = frozenset({"http", "https"})


@dataclass(frozen=True)
class ApiSpecification:
    """One loaded specification: a host, base path, and its endpoints."""

    id: str
    title: str
    host: str
    base_path: PathTemplate = PathTemplate(())
    schemes: frozenset[str] = frozenset({"https"})
    endpoints: tuple[Endpoint, ...] = ()

    def __post_init__(self) -> None:
        host = self.host.lower()
        if not _HOST_RE.match(host):
            raise SpecError(f"invalid host: {self.host!r}")
        object.__setattr__(self, "host", host)
        if not self.schemes or not self.schemes <= _SCHEMES:
            raise SpecError("schemes must be a non-empty subset of http/https")
        if any(isinstance(s, Param) for s in self.base_path.segments):
            raise SpecError("basePath must not contain path parameters")
        ordered = tuple(
            sorted(self.endpoints, key=lambda e: (e.template.render(), e.method.value))
        )
        object.__setattr__(self, "endpoints", ordered)
        seen: set[tuple[str, HttpMethod]] = set()
        for e in ordered:
            key = (e.template.render(), e.method)
            if key in seen:
                raise SpecError(f"duplicate endpoint: {e.method.value} {key[0]}")
            seen.add(key)

    def full_template(self, endpoint: Endpoint) -> PathTemplate:
        """The endpoint's route prefixed with this spec's basePath."""
        return self.base_path.concat(endpoint.template)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SpecError(message)


def load_spec(document: Any, spec_id: str) -> ApiSpecification:
    """Build an ApiSpecification from a parsed OpenAPI 2.0 subset document.

    Unknown document keys are ignored.  Structural problems (missing
    host, bad template, unknown method key, bad scheme) raise SpecError.
    """
    _require(isinstance(document, Mapping), f"{spec_id}: document must be an object")
    host = document.get("host")
    _require(
        isinstance(host, str) and host != "", f"{spec_id}: missing or empty 'host'"
    )

    base_raw = document.get("basePath", "")
    _require(isinstance(base_raw, str), f"{spec_id}: 'basePath' must be a string")
    try:
        base_path = parse_path_template(base_raw)
    except SpecError as exc:
        raise SpecError(f"{spec_id}: bad basePath: {exc}") from None

    schemes_raw = document.get("schemes")
    if schemes_raw is None:
        schemes = frozenset({"https"})
    else:
        _require(
            isinstance(schemes_raw, list) and schemes_raw,
            f"{spec_id}: 'schemes' must be a non-empty array",
        )
        for s in schemes_raw:
            _require(s in _SCHEMES, f"{spec_id}: unsupported scheme {s!r}")
        schemes = frozenset(schemes_raw)

    info = document.get("info")
    title = spec_id
    if isinstance(info, Mapping) and isinstance(info.get("title"), str):
        title = info["title"]

    paths = document.get("paths", {})
    _require(isinstance(paths, Mapping), f"{spec_id}: 'paths' must be an object")

    endpoints: list[Endpoint] = []
    for route_text, operations in paths.items():
        try:
            template = parse_path_template(route_text)
        except SpecError as exc:
            raise SpecError(f"{spec_id}: bad route {route_text!r}: {exc}") from None
        _require(
            isinstance(operations, Mapping),
            f"{spec_id}: route {route_text!r} must map methods to operations",
        )
        for method_key, operation in operations.items():
            method = _METHOD_BY_KEY.get(str(method_key).lower())
            _require(
                method is not None,
                f"{spec_id}: unknown method {method_key!r} on {route_text!r}",
            )
            endpoints.append(
                _load_operation(spec_id, route_text, template, method, operation)
            )

    try:
        return ApiSpecification(
            id=spec_id,
            title=title,
            host=host,
            base_path=base_path,
            schemes=schemes,
            endpoints=tuple(endpoints),
        )
    except SpecError as exc:
        raise SpecError(f"{spec_id}: {exc}") from None


def _load_operation(
    spec_id: str,
    route_text: str,
    template: PathTemplate,
    method: HttpMethod,
    operation: Any,
) -> Endpoint:
    where = f"{spec_id}: {method.value} {route_text}"
    _require(isinstance(operation, Mapping), f"{where}: operation must be an object")
    params_raw = operation.get("parameters", [])
    _require(isinstance(params_raw, list), f"{where}: 'parameters' must be an array")

    parameters: list[ParameterSpec] = []
    body_fields: set[str] = set()
    for entry in params_raw:
        _require(isinstance(entry, Mapping), f"{where}: parameter must be an object")
        name = entry.get("name")
        _require(
            isinstance(name, str) and name != "",
            f"{where}: parameter missing 'name'",
        )
        location = entry.get("in")
        _require(
            location in ("query", "path", "body"),
            f"{where}: parameter {name!r} has unsupported 'in': {location!r}",
        )
        if location == "body":
            schema = entry.get("schema", {})
            required = schema.get("required", []) if isinstance(schema, Mapping) else []
            _require(
                isinstance(required, list)
                and all(isinstance(f, str) for f in required),
                f"{where}: body schema 'required' must be an array of strings",
            )
            body_fields.update(required)
            continue
        type_key = entry.get("type")
        if type_key is None:
            value_type = ValueType.ANY
        else:
            value_type = _TYPE_BY_KEY.get(type_key, ValueType.ANY)
        parameters.append(
            ParameterSpec(
                name=name,
                location=ParamLocation(location),
                required=bool(entry.get("required", False)),
                value_type=value_type,
            )
        )

    # Template parameters without an explicit declaration get one.
    declared = {p.name for p in parameters if p.location is ParamLocation.PATH}
    for pname in template.param_names():
        if pname not in declared:
            parameters.append(
                ParameterSpec(pname, ParamLocation.PATH, required=True)
            )

    return Endpoint(
        template=template,
        method=method,
        parameters=tuple(parameters),
        required_body_fields=frozenset(body_fields),
    )


def emit_spec(spec: ApiSpecification) -> dict[str, Any]:
    """Serialize a specification back to the document subset.

    load_spec(emit_spec(s), s.id) reconstructs an equal specification.
    """
    paths: dict[str, dict[str, Any]] = {}
    for e in spec.endpoints:
        route = e.template.render()
        params: list[dict[str, Any]] = []
        for p in e.parameters:
            entry: dict[str, Any] = {"name": p.name, "in": p.location.value}
            if p.required:
                entry["required"] = True
            if p.value_type is not ValueType.ANY:
                entry["type"] = p.value_type.value
            params.append(entry)
        if e.required_body_fields:
            params.append(
                {
                    "name": "body",
                    "in": "body",
                    "required": True,
                    "schema": {"required": sorted(e.required_body_fields)},
                }
            )
        operation: dict[str, Any] = {}
        if params:
            operation["parameters"] = params
        paths.setdefault(route, {})[e.method.value.lower()] = operation

    document: dict[str, Any] = {
        "host": spec.host,
        "basePath": "" if not spec.base_path.segments else spec.base_path.render(),
        "schemes": sorted(spec.schemes),
        "info": {"title": spec.title},
        "paths": paths,
    }
    return document


class SpecDatabase:
    """An immutable host-indexed collection of specifications."""

    def __init__(self, specs: Iterable[ApiSpecification] = ()):
        ordered = sorted(specs, key=lambda s: s.id)
        ids = [s.id for s in ordered]
        if len(ids) != len(set(ids)):
            raise SpecError("duplicate specification ids")
        self._specs = tuple(ordered)
        self._by_host: dict[str, tuple[ApiSpecification, ...]] = {}
        for spec in ordered:
            have = self._by_host.get(spec.host, ())
            self._by_host[spec.host] = have + (spec,)

    def __len__(self) -> int:
        return len(self._specs)

    def __iter__(self) -> Iterator[ApiSpecification]:
        return iter(self._specs)

    @property
    def specs(self) -> tuple[ApiSpecification, ...]:
        return self._specs

    def lookup_by_host(self, host: str) -> tuple[ApiSpecification, ...]:
        """All specifications registered for a host (case-insensitive)."""
        return self._by_host.get(host.lower(), ())

    def with_overrides(
        self, specs: Iterable[ApiSpecification]
    ) -> "SpecDatabase":
        """A database where the given specs shadow same-host entries."""
        overrides = list(specs)
        shadowed = {s.host for s in overrides}
        kept = [s for s in self._specs if s.host not in shadowed]
        return SpecDatabase(kept + overrides)


def load_spec_file(path: FsPath | str) -> ApiSpecification:
    path = FsPath(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: not valid JSON: {exc}") from None
    return load_spec(document, path.stem)


def load_spec_dir(directory: FsPath | str) -> SpecDatabase:
    """Load every *.json file in a directory into one database."""
    directory = FsPath(directory)
    if not directory.is_dir():
        raise SpecError(f"spec directory not found: {directory}")
    specs = [load_spec_file(p) for p in sorted(directory.glob("*.json"))]
    return SpecDatabase(specs)

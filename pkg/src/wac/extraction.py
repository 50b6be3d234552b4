"""Request-site recognition and structured extraction.

Finds jQuery and fetch call sites, pulls the URL, method, query data,
and payload shape out of the flow results, and parses URL patterns
into scheme/host/path/query parts the conformance checks consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from wac.flow import (
    AbstractValue,
    FlowResult,
    Func,
    Literal,
    Obj,
    PatternSet,
    Prim,
    PrimSet,
    Str,
    StringPart,
    StringPattern,
    Symbolic,
    Unknown,
    join_pattern_sets,
    literal_pattern,
    to_pattern_set,
)
from wac.js import nodes as js
from wac.specs import HttpMethod


class Framework(Enum):
    JQUERY_AJAX = "jquery.ajax"
    JQUERY_GET = "jquery.get"
    JQUERY_POST = "jquery.post"
    JQUERY_GETJSON = "jquery.getJSON"
    FETCH = "fetch"


class PayloadKind(Enum):
    NONE = "none"
    SHAPE = "shape"
    OPAQUE = "opaque"


@dataclass
class Payload:
    kind: PayloadKind
    fields: dict[str, PatternSet] = field(default_factory=dict)


NO_PAYLOAD = Payload(PayloadKind.NONE)

# Methods whose jQuery `data` travels in the query string.
_QUERY_METHODS = frozenset({HttpMethod.GET, HttpMethod.DELETE, HttpMethod.HEAD})


@dataclass
class ExtractedRequest:
    """One request site with everything the checks need.

    url is the single resolved pattern, or None when the URL is
    unknown or ambiguous; url_patterns keeps the full flow-level set
    for analyses that want every alternative.
    """

    span: js.SourceSpan
    framework: Framework
    url: Optional[StringPattern]
    method: Optional[HttpMethod]  # None = symbolic
    query_params: dict[str, PatternSet] = field(default_factory=dict)
    query_truncated: bool = False
    payload: Payload = field(default_factory=lambda: Payload(PayloadKind.NONE))
    url_patterns: Optional[PatternSet] = None


_JQUERY_METHODS = {
    "ajax": Framework.JQUERY_AJAX,
    "get": Framework.JQUERY_GET,
    "post": Framework.JQUERY_POST,
    "getJSON": Framework.JQUERY_GETJSON,
}


def find_request_sites(program: js.Program) -> list[tuple[js.Call, Framework]]:
    """All request call sites, purely syntactic, in source order."""
    sites: list[tuple[js.Call, Framework]] = []
    for node in js.walk(program):
        if not isinstance(node, js.Call):
            continue
        callee = node.callee
        if isinstance(callee, js.Identifier) and callee.name == "fetch":
            sites.append((node, Framework.FETCH))
        elif (
            isinstance(callee, js.Member)
            and isinstance(callee.obj, js.Identifier)
            and callee.obj.name in ("$", "jQuery")
            and callee.prop in _JQUERY_METHODS
        ):
            sites.append((node, _JQUERY_METHODS[callee.prop]))
    return sites


def _value_at(flow: FlowResult, node: Optional[js.Node]) -> Optional[AbstractValue]:
    if node is None:
        return None
    return flow.value_of(node)


def _url_from_value(value: Optional[AbstractValue]) -> tuple[Optional[StringPattern], Optional[PatternSet]]:
    if isinstance(value, Str):
        return value.patterns.single(), value.patterns
    if isinstance(value, (Prim, PrimSet)):
        patterns = to_pattern_set(value, "url")
        return patterns.single(), patterns
    return None, None


def _method_from_value(value: Optional[AbstractValue]) -> Optional[HttpMethod]:
    """A literal method name, or None for anything unresolvable."""
    text: Optional[str] = None
    if isinstance(value, Str):
        single = value.patterns.single()
        if single is not None and single.is_literal():
            text = single.literal_text()
    elif isinstance(value, Prim):
        text = value.text
    if text is None:
        return None
    try:
        return HttpMethod(text.upper())
    except ValueError:
        return None


def _field_pattern_set(value: AbstractValue, name: str) -> PatternSet:
    return to_pattern_set(value, name)


def _parse_literal_query(text: str) -> dict[str, PatternSet]:
    pairs: dict[str, PatternSet] = {}
    for chunk in text.split("&"):
        if not chunk:
            continue
        name, _, value = chunk.partition("=")
        if not name:
            continue
        ps = PatternSet.of(literal_pattern(value))
        pairs[name] = join_pattern_sets(pairs[name], ps) if name in pairs else ps
    return pairs


def _route_data(
    request: ExtractedRequest,
    data_value: Optional[AbstractValue],
    data_node: Optional[js.Node],
    method: Optional[HttpMethod],
) -> None:
    """Send jQuery `data` to the query map or the payload, per method."""
    if data_value is None or isinstance(data_value, Func):
        return
    if isinstance(data_node, js.FunctionExpr):
        return  # success callback, not data
    if method is None:
        # Symbolic method: the data could go either way.
        request.query_truncated = True
        request.payload = Payload(PayloadKind.OPAQUE)
        return
    if method in _QUERY_METHODS:
        if isinstance(data_value, Obj):
            for name, value in data_value.fields.items():
                request.query_params[name] = _field_pattern_set(value, name)
            return
        if isinstance(data_value, Str):
            single = data_value.patterns.single()
            if single is not None and single.is_literal():
                request.query_params.update(_parse_literal_query(single.literal_text()))
                return
        request.query_truncated = True
        return
    # Body-carrying methods.
    if isinstance(data_value, Obj):
        request.payload = Payload(
            PayloadKind.SHAPE,
            {name: _field_pattern_set(v, name) for name, v in data_value.fields.items()},
        )
    else:
        request.payload = Payload(PayloadKind.OPAQUE)


def extract_request(
    site: js.Call, framework: Framework, flow: FlowResult
) -> ExtractedRequest:
    request = ExtractedRequest(
        span=site.span, framework=framework, url=None, method=HttpMethod.GET
    )
    args = site.args

    if framework is Framework.JQUERY_AJAX:
        settings: Optional[AbstractValue] = None
        url_value: Optional[AbstractValue] = None
        first = _value_at(flow, args[0] if args else None)
        if isinstance(first, Obj):
            settings = first
            url_value = first.fields.get("url")
        else:
            url_value = first
            second = _value_at(flow, args[1] if len(args) > 1 else None)
            if isinstance(second, Obj):
                settings = second
        request.url, request.url_patterns = _url_from_value(url_value)
        data_value: Optional[AbstractValue] = None
        data_node: Optional[js.Node] = None
        if isinstance(settings, Obj):
            method_value = settings.fields.get("method", settings.fields.get("type"))
            if method_value is None:
                request.method = HttpMethod.GET
            else:
                request.method = _method_from_value(method_value)
            data_value = settings.fields.get("data")
        elif args and first is not None and not isinstance(first, (Str, Prim, PrimSet)):
            # $.ajax(settings) with an unresolvable settings object:
            # method and data are both unknown.
            request.method = None
            request.query_truncated = True
            request.payload = Payload(PayloadKind.OPAQUE)
            return request
        _route_data(request, data_value, data_node, request.method)
        return request

    if framework in (
        Framework.JQUERY_GET,
        Framework.JQUERY_POST,
        Framework.JQUERY_GETJSON,
    ):
        request.method = (
            HttpMethod.POST if framework is Framework.JQUERY_POST else HttpMethod.GET
        )
        request.url, request.url_patterns = _url_from_value(
            _value_at(flow, args[0] if args else None)
        )
        data_node = args[1] if len(args) > 1 else None
        _route_data(request, _value_at(flow, data_node), data_node, request.method)
        return request

    # fetch(url[, options])
    request.url, request.url_patterns = _url_from_value(
        _value_at(flow, args[0] if args else None)
    )
    options = _value_at(flow, args[1] if len(args) > 1 else None)
    if isinstance(options, Obj):
        method_value = options.fields.get("method")
        request.method = (
            HttpMethod.GET if method_value is None else _method_from_value(method_value)
        )
        body = options.fields.get("body")
        if body is None:
            request.payload = Payload(PayloadKind.NONE)
        elif isinstance(body, Obj):
            request.payload = Payload(
                PayloadKind.SHAPE,
                {name: _field_pattern_set(v, name) for name, v in body.fields.items()},
            )
        else:
            request.payload = Payload(PayloadKind.OPAQUE)
    elif len(args) > 1:
        # Options present but unresolvable.
        request.method = None
        request.payload = Payload(PayloadKind.OPAQUE)
    return request


def extract_requests(program: js.Program, flow: FlowResult) -> list[ExtractedRequest]:
    return [
        extract_request(site, framework, flow)
        for site, framework in find_request_sites(program)
    ]


# --- URL pattern structure ---


class UrlScheme(Enum):
    HTTP = "http"
    HTTPS = "https"
    MISSING = "missing"
    SYMBOLIC = "symbolic"


PatternSegment = tuple[StringPart, ...]

# Host for URLs resolved against the enclosing page's origin.
ORIGIN_HOST = Symbolic("origin")


@dataclass
class UrlParts:
    scheme: UrlScheme
    host: StringPart  # Literal lowercase host, or Symbolic
    segments: tuple[PatternSegment, ...] = ()
    query: dict[str, PatternSet] = field(default_factory=dict)
    query_truncated: bool = False

    def literal_host(self) -> Optional[str]:
        return self.host.text if isinstance(self.host, Literal) else None

    def render_path(self) -> str:
        if not self.segments:
            return "/"
        return "/" + "/".join(
            StringPattern(seg).render() for seg in self.segments
        )

    def render(self) -> str:
        """Re-render to a form that parses back to the same parts."""
        out = ""
        if self.scheme in (UrlScheme.HTTP, UrlScheme.HTTPS):
            out = f"{self.scheme.value}://"
        elif self.scheme is UrlScheme.MISSING and self.host is not ORIGIN_HOST:
            out = "//"
        if self.host is ORIGIN_HOST:
            pass
        elif isinstance(self.host, Literal):
            out += self.host.text
        else:
            out += StringPattern((self.host,)).render()
        if self.segments:
            out += self.render_path()
        if self.query:
            pairs = "&".join(
                f"{name}={StringPattern(value.sorted_patterns()[0].parts).render()}"
                if value.patterns
                else f"{name}="
                for name, value in self.query.items()
            )
            out += "?" + pairs
        return out


def parse_url_pattern(url: StringPattern) -> UrlParts:
    """Split a URL pattern into scheme, host, path segments, and query.

    Path splitting happens only at '/' characters inside Literal parts;
    a '?' inside a Literal part starts the query region.  A Symbolic
    part in the authority region makes the host symbolic, and a URL
    with no scheme and no authority resolves against the page origin.
    """
    parts = list(url.parts)
    if not parts:
        return UrlParts(UrlScheme.MISSING, ORIGIN_HOST)

    if isinstance(parts[0], Symbolic):
        # Leading hole: scheme and host are both unknown.
        return UrlParts(UrlScheme.SYMBOLIC, Symbolic(parts[0].name))

    text = parts[0].text
    tail = parts[1:]
    if text.startswith("https://"):
        scheme, after = UrlScheme.HTTPS, text[len("https://") :]
    elif text.startswith("http://"):
        scheme, after = UrlScheme.HTTP, text[len("http://") :]
    elif text.startswith("//"):
        scheme, after = UrlScheme.MISSING, text[len("//") :]
    else:
        # No recognizable scheme or authority: origin-relative.
        segments, query, truncated = _parse_path(parts)
        return UrlParts(UrlScheme.MISSING, ORIGIN_HOST, segments, query, truncated)
    host, path_parts = _parse_authority(after, tail)
    segments, query, truncated = _parse_path(path_parts)
    return UrlParts(scheme, host, segments, query, truncated)


def _parse_authority(
    after_scheme: str, tail: list[StringPart]
) -> tuple[StringPart, list[StringPart]]:
    """Split host from the first path/query delimiter; symbolic parts
    in the authority make the host Symbolic."""
    for i, ch in enumerate(after_scheme):
        if ch in "/?":
            host = after_scheme[:i]
            remainder: list[StringPart] = [Literal(after_scheme[i:])] + tail
            if not host:
                return Symbolic("host"), remainder
            return Literal(host.lower()), remainder
    # No delimiter inside the first literal.
    if not tail:
        if not after_scheme:
            return Symbolic("host"), []
        return Literal(after_scheme.lower()), []
    # The next part is symbolic (adjacent literals always merge), so
    # the authority region is symbolic; resume at the first literal '/'.
    symbolic_name = next(
        (p.name for p in tail if isinstance(p, Symbolic)), "host"
    )
    for j, part in enumerate(tail):
        if isinstance(part, Literal):
            k = part.text.find("/")
            if k >= 0:
                return Symbolic(symbolic_name), [Literal(part.text[k:])] + tail[j + 1 :]
    return Symbolic(symbolic_name), []


def _parse_path(
    parts: list[StringPart],
) -> tuple[tuple[PatternSegment, ...], dict[str, PatternSet], bool]:
    segments: list[PatternSegment] = []
    current: list[StringPart] = []
    query_parts: list[StringPart] = []
    in_query = False

    def flush_segment() -> None:
        seg = StringPattern(tuple(current)).parts
        current.clear()
        if seg:
            segments.append(seg)

    for part in parts:
        if in_query:
            query_parts.append(part)
            continue
        if isinstance(part, Symbolic):
            current.append(part)
            continue
        run = ""
        for ch in part.text:
            if ch == "/":
                if run:
                    current.append(Literal(run))
                    run = ""
                flush_segment()
            elif ch == "?":
                if run:
                    current.append(Literal(run))
                    run = ""
                flush_segment()
                in_query = True
                break
            else:
                run += ch
        else:
            if run:
                current.append(Literal(run))
            continue
        # Reached only via the '?' break: the rest of this literal
        # belongs to the query.
        remainder = part.text.split("?", 1)[1]
        if remainder:
            query_parts.append(Literal(remainder))
    if not in_query:
        flush_segment()

    query, truncated = _parse_query(query_parts)
    return tuple(segments), query, truncated


def _parse_query(
    parts: list[StringPart],
) -> tuple[dict[str, PatternSet], bool]:
    query: dict[str, PatternSet] = {}
    truncated = False
    name_parts: list[StringPart] = []
    value_parts: list[StringPart] = []
    seen_eq = False

    def flush_pair() -> None:
        nonlocal truncated, seen_eq
        name = StringPattern(tuple(name_parts))
        name_parts.clear()
        value = StringPattern(tuple(value_parts))
        value_parts.clear()
        seen_eq = False
        if not name.parts:
            return
        if not name.is_literal():
            truncated = True
            return
        key = name.literal_text()
        ps = PatternSet.of(value)
        query[key] = join_pattern_sets(query[key], ps) if key in query else ps

    for part in parts:
        if isinstance(part, Symbolic):
            (value_parts if seen_eq else name_parts).append(part)
            continue
        run = ""
        side = value_parts if seen_eq else name_parts
        for ch in part.text:
            if ch == "&":
                if run:
                    side.append(Literal(run))
                    run = ""
                flush_pair()
                side = name_parts
            elif ch == "=" and not seen_eq:
                if run:
                    side.append(Literal(run))
                    run = ""
                seen_eq = True
                side = value_parts
            else:
                run += ch
        if run:
            side.append(Literal(run))
    if name_parts or value_parts or seen_eq:
        flush_pair()
    return query, truncated


# --- JSON rendering ---


def _render_pattern_set(ps: PatternSet) -> str:
    rendered = [p.render() for p in ps.sorted_patterns()]
    return "|".join(rendered)


def request_to_json(request: ExtractedRequest) -> dict[str, Any]:
    """The stable JSON shape `wac extract` emits."""
    return {
        "file": request.span.file,
        "line": request.span.start_line,
        "col": request.span.start_col,
        "framework": request.framework.value,
        "url": request.url.render() if request.url is not None else None,
        "method": request.method.value if request.method is not None else None,
        "query": {
            name: _render_pattern_set(ps)
            for name, ps in sorted(request.query_params.items())
        },
        "payload": {
            "kind": request.payload.kind.value,
            "fields": {
                name: _render_pattern_set(ps)
                for name, ps in sorted(request.payload.fields.items())
            },
        },
    }

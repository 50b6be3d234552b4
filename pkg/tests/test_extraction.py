import random

from soundness import unrender
from wac.extraction import (
    ORIGIN_HOST,
    ExtractedRequest,
    Framework,
    Payload,
    PayloadKind,
    UrlScheme,
    extract_requests,
    find_request_sites,
    parse_url_pattern,
    request_to_json,
)
from wac.flow import (
    Literal,
    PatternSet,
    StringPattern,
    Symbolic,
    analyze_program,
    literal_pattern,
    symbolic_pattern,
)
from wac.js.parser import parse
from wac.specs import HttpMethod


def extract(source: str) -> list[ExtractedRequest]:
    parsed = parse(source, "t.js")
    assert not parsed.errors, parsed.errors
    flow = analyze_program(parsed.program)
    return extract_requests(parsed.program, flow)


def extract_one(source: str) -> ExtractedRequest:
    requests = extract(source)
    assert len(requests) == 1, requests
    return requests[0]


def render_query(request: ExtractedRequest) -> dict[str, set[str]]:
    return {
        name: {p.render() for p in ps.patterns}
        for name, ps in request.query_params.items()
    }


class TestFindRequestSites:
    def test_recognizes_each_framework(self):
        source = (
            '$.ajax({ url: "/a" });\n'
            '$.get("/b");\n'
            '$.post("/c");\n'
            '$.getJSON("/d");\n'
            'fetch("/e");\n'
            'jQuery.ajax({ url: "/f" });\n'
        )
        parsed = parse(source, "t.js")
        frameworks = [fw for _, fw in find_request_sites(parsed.program)]
        assert frameworks == [
            Framework.JQUERY_AJAX,
            Framework.JQUERY_GET,
            Framework.JQUERY_POST,
            Framework.JQUERY_GETJSON,
            Framework.FETCH,
            Framework.JQUERY_AJAX,
        ]

    def test_ignores_lookalikes(self):
        source = 'other.ajax({});\n$.load("/x");\nfetchData("/y");\n'
        parsed = parse(source, "t.js")
        assert find_request_sites(parsed.program) == []

    def test_finds_sites_inside_functions(self):
        source = 'function go() { $.get("/inner"); }\n'
        parsed = parse(source, "t.js")
        assert len(find_request_sites(parsed.program)) == 1


class TestExtractAjax:
    def test_settings_object(self):
        request = extract_one(
            '$.ajax({ url: "https://h.test/v1/items", type: "GET",'
            ' data: { access_token: tok } });\n'
        )
        assert request.framework is Framework.JQUERY_AJAX
        assert request.method is HttpMethod.GET
        assert request.url.render() == "https://h.test/v1/items"
        assert render_query(request) == {"access_token": {"{tok}"}}
        assert request.payload.kind is PayloadKind.NONE

    def test_method_field_wins_over_type(self):
        request = extract_one(
            '$.ajax({ url: "/x", type: "GET", method: "POST" });\n'
        )
        assert request.method is HttpMethod.POST

    def test_method_defaults_to_get(self):
        request = extract_one('$.ajax({ url: "/x" });\n')
        assert request.method is HttpMethod.GET

    def test_lowercase_method_literal(self):
        request = extract_one('$.ajax({ url: "/x", type: "post" });\n')
        assert request.method is HttpMethod.POST

    def test_symbolic_method_routes_data_both_ways(self):
        request = extract_one('$.ajax({ url: "/x", type: m, data: { a: 1 } });\n')
        assert request.method is None
        assert request.query_truncated
        assert request.payload.kind is PayloadKind.OPAQUE

    def test_body_method_routes_data_to_payload(self):
        request = extract_one(
            '$.ajax({ url: "/x", type: "POST", data: { name: n, kind: "a" } });\n'
        )
        assert request.payload.kind is PayloadKind.SHAPE
        assert set(request.payload.fields) == {"name", "kind"}
        assert request.query_params == {}

    def test_delete_data_goes_to_query(self):
        request = extract_one(
            '$.ajax({ url: "/x", type: "DELETE", data: { access_token: t } });\n'
        )
        assert set(request.query_params) == {"access_token"}
        assert request.payload.kind is PayloadKind.NONE

    def test_url_and_settings_form(self):
        request = extract_one('$.ajax("/x", { type: "PUT" });\n')
        assert request.method is HttpMethod.PUT
        assert request.url.render() == "/x"

    def test_unresolvable_settings(self):
        request = extract_one("$.ajax(cfg);\n")
        assert request.url is None
        assert request.method is None
        assert request.query_truncated
        assert request.payload.kind is PayloadKind.OPAQUE

    def test_settings_through_a_variable(self):
        request = extract_one(
            'var s = { url: "/v1/items", type: "GET" };\n$.ajax(s);\n'
        )
        assert request.url.render() == "/v1/items"
        assert request.method is HttpMethod.GET

    def test_literal_query_string_data(self):
        request = extract_one('$.ajax({ url: "/x", data: "a=1&b=2" });\n')
        assert render_query(request) == {"a": {"1"}, "b": {"2"}}

    def test_unknown_get_data_truncates_query(self):
        request = extract_one('$.ajax({ url: "/x", data: d });\n')
        assert request.query_params == {}
        assert request.query_truncated

    def test_ambiguous_url_keeps_all_patterns(self):
        request = extract_one(
            'var u = "/a";\nif (c) { u = "/b"; }\n$.ajax({ url: u });\n'
        )
        assert request.url is None
        assert {p.render() for p in request.url_patterns.patterns} == {"/a", "/b"}


class TestExtractShorthand:
    def test_get_data_is_query(self):
        request = extract_one('$.get("/x", { page: 2 });\n')
        assert request.framework is Framework.JQUERY_GET
        assert request.method is HttpMethod.GET
        assert render_query(request) == {"page": {"2"}}

    def test_post_data_is_payload(self):
        request = extract_one('$.post("/x", { name: "n" });\n')
        assert request.method is HttpMethod.POST
        assert request.payload.kind is PayloadKind.SHAPE
        assert set(request.payload.fields) == {"name"}

    def test_getjson_callback_is_not_data(self):
        request = extract_one(
            '$.getJSON("/x", function (d) { show(d); });\n'
        )
        assert request.method is HttpMethod.GET
        assert request.query_params == {}
        assert not request.query_truncated
        assert request.payload.kind is PayloadKind.NONE

    def test_named_callback_is_not_data(self):
        request = extract_one(
            "function show(d) { render(d); }\n$.get(\"/x\", show);\n"
        )
        assert request.query_params == {}
        assert not request.query_truncated


class TestExtractFetch:
    def test_bare_fetch_defaults_to_get(self):
        request = extract_one('fetch("/api/items");\n')
        assert request.framework is Framework.FETCH
        assert request.method is HttpMethod.GET
        assert request.payload.kind is PayloadKind.NONE

    def test_fetch_options(self):
        request = extract_one(
            'fetch("/api/users", { method: "POST", body: { name: n } });\n'
        )
        assert request.method is HttpMethod.POST
        assert request.payload.kind is PayloadKind.SHAPE
        assert set(request.payload.fields) == {"name"}

    def test_fetch_opaque_body(self):
        request = extract_one('fetch("/x", { method: "PUT", body: raw });\n')
        assert request.payload.kind is PayloadKind.OPAQUE

    def test_fetch_unresolvable_options(self):
        request = extract_one('fetch("/x", opts);\n')
        assert request.method is None
        assert request.payload.kind is PayloadKind.OPAQUE


class TestRequestToJson:
    def test_shape(self):
        request = extract_one(
            '$.ajax({ url: "https://h.test/a", type: "GET", data: { t: v } });\n'
        )
        doc = request_to_json(request)
        assert doc == {
            "file": "t.js",
            "line": doc["line"],
            "col": doc["col"],
            "framework": "jquery.ajax",
            "url": "https://h.test/a",
            "method": "GET",
            "query": {"t": "{v}"},
            "payload": {"kind": "none", "fields": {}},
        }

    def test_symbolic_method_and_url_are_null(self):
        request = extract_one("$.ajax(cfg);\n")
        doc = request_to_json(request)
        assert doc["url"] is None
        assert doc["method"] is None


def pattern(*parts) -> StringPattern:
    built = []
    for part in parts:
        if isinstance(part, str):
            built.append(Literal(part))
        else:
            built.append(part)
    return StringPattern(tuple(built))


class TestParseUrlPattern:
    def test_absolute_https(self):
        parts = parse_url_pattern(pattern("https://API.Example.com/v1/items"))
        assert parts.scheme is UrlScheme.HTTPS
        assert parts.host == Literal("api.example.com")
        assert parts.render_path() == "/v1/items"
        assert parts.query == {}

    def test_absolute_http(self):
        parts = parse_url_pattern(pattern("http://h.test/"))
        assert parts.scheme is UrlScheme.HTTP
        assert parts.host == Literal("h.test")
        assert parts.segments == ()
        assert parts.render_path() == "/"

    def test_scheme_relative(self):
        parts = parse_url_pattern(pattern("//h.test/a"))
        assert parts.scheme is UrlScheme.MISSING
        assert parts.host == Literal("h.test")

    def test_origin_relative(self):
        parts = parse_url_pattern(pattern("/v1/items"))
        assert parts.scheme is UrlScheme.MISSING
        assert parts.host is ORIGIN_HOST

    def test_relative_without_slash(self):
        parts = parse_url_pattern(pattern("items/all"))
        assert parts.host is ORIGIN_HOST
        assert parts.render_path() == "/items/all"

    def test_leading_symbolic_part(self):
        parts = parse_url_pattern(pattern(Symbolic("base"), "/items"))
        assert parts.scheme is UrlScheme.SYMBOLIC
        assert parts.host == Symbolic("base")

    def test_symbolic_authority(self):
        parts = parse_url_pattern(pattern("https://", Symbolic("host"), "/v1/x"))
        assert parts.scheme is UrlScheme.HTTPS
        assert parts.host == Symbolic("host")
        assert parts.render_path() == "/v1/x"

    def test_symbolic_inside_segment(self):
        parts = parse_url_pattern(
            pattern("https://h.test/v1/tags/", Symbolic("tag"), "/media")
        )
        assert parts.render_path() == "/v1/tags/{tag}/media"
        assert parts.segments[2] == (Symbolic("tag"),)

    def test_mixed_segment(self):
        parts = parse_url_pattern(pattern("/files/report-", Symbolic("n"), ".pdf"))
        assert parts.render_path() == "/files/report-{n}.pdf"

    def test_symbolic_never_splits_segments(self):
        # a '/' hidden inside a symbolic value cannot split the path
        parts = parse_url_pattern(pattern("/a/", Symbolic("rest")))
        assert parts.render_path() == "/a/{rest}"
        assert len(parts.segments) == 2

    def test_empty_segments_drop(self):
        parts = parse_url_pattern(pattern("/a//b/"))
        assert parts.render_path() == "/a/b"

    def test_query_literal(self):
        parts = parse_url_pattern(pattern("/items?a=1&b=2"))
        assert parts.render_path() == "/items"
        assert {k: {p.render() for p in v.patterns} for k, v in parts.query.items()} == {
            "a": {"1"},
            "b": {"2"},
        }
        assert not parts.query_truncated

    def test_query_symbolic_value(self):
        parts = parse_url_pattern(pattern("/items?token=", Symbolic("t")))
        assert {p.render() for p in parts.query["token"].patterns} == {"{t}"}
        assert not parts.query_truncated

    def test_query_symbolic_name_truncates(self):
        parts = parse_url_pattern(pattern("/items?", Symbolic("pair")))
        assert parts.query == {}
        assert parts.query_truncated

    def test_bare_query_name(self):
        parts = parse_url_pattern(pattern("/items?flag"))
        assert "flag" in parts.query

    def test_question_mark_at_host_boundary(self):
        parts = parse_url_pattern(pattern("https://h.test?a=1"))
        assert parts.host == Literal("h.test")
        assert parts.segments == ()
        assert "a" in parts.query

    def test_host_with_port(self):
        parts = parse_url_pattern(pattern("http://h.test:8080/x"))
        assert parts.host == Literal("h.test:8080")

    def test_empty_authority_is_symbolic_host(self):
        parts = parse_url_pattern(pattern("https://"))
        assert parts.host == Symbolic("host")


class TestUrlRenderRoundTrip:
    def test_reparse_is_stable(self):
        # parsing the rendering of a parse gives the same structure
        rng = random.Random(7)
        hosts = ["h.test", "api.example.com", "h.test:9000"]
        segment_pool = ["items", "v1", "a-b", "{x}", "r{n}c", "{a}{b}"]
        for _ in range(300):
            scheme = rng.choice(["https://", "http://", "//", "/"])
            text = scheme
            if scheme != "/":
                text += rng.choice(hosts) + "/"
            text += "/".join(
                rng.choice(segment_pool) for _ in range(rng.randint(0, 3))
            )
            if rng.random() < 0.4:
                text += "?tok=" + rng.choice(["1", "{t}"])
            first = parse_url_pattern(unrender(text))
            second = parse_url_pattern(unrender(first.render()))
            assert second.scheme is first.scheme
            assert second.host == first.host
            assert second.segments == first.segments
            assert second.query == first.query
            assert second.query_truncated is first.query_truncated

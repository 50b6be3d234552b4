"""wac: static extraction and conformance checking of web API requests.

The package analyzes a JavaScript subset, extracts the HTTP requests a
program can issue (URL, method, query parameters, payload shape) as
string patterns, checks them against OpenAPI 2.0 subset specifications,
and infers specifications from logs of concrete requests.
"""

__version__ = "0.1.0"

"""IRI validation and the single normalization pass used for identity."""

from __future__ import annotations

import re
from urllib.parse import urljoin

__all__ = ["Iri", "InvalidIriError", "resolve"]

_SCHEME = re.compile(r"^([A-Za-z][A-Za-z0-9+.\-]*):")
_AUTHORITY = re.compile(r"^//([^/?#]*)")
_WHITESPACE = re.compile(r"\s")

DEFAULT_PORTS = {"http": "80", "https": "443", "ftp": "21", "ws": "80", "wss": "443"}


class InvalidIriError(ValueError):
    pass


def _normalize(value: str) -> str:
    m = _SCHEME.match(value)
    if m is None:
        raise InvalidIriError(f"not an absolute IRI: {value!r}")
    scheme = m.group(1).lower()
    rest = value[m.end():]
    a = _AUTHORITY.match(rest)
    if a is None:
        return f"{scheme}:{rest}"
    authority = a.group(1)
    userinfo, at, hostport = authority.rpartition("@")
    host, port = hostport, ""
    # a trailing ":digits" outside an IPv6 literal is the port
    pm = re.match(r"^(.*?)(?::(\d*))?$", hostport) if not hostport.endswith("]") else None
    if pm is not None:
        host, port = pm.group(1), pm.group(2) or ""
    if port and DEFAULT_PORTS.get(scheme) == port:
        port = ""
    host = host.lower()
    hostport = f"{host}:{port}" if port else host
    authority = f"{userinfo}{at}{hostport}"
    return f"{scheme}://{authority}{rest[a.end():]}"


class Iri(str):
    """An absolute IRI, normalized once on construction.

    Scheme and host are lowercased and default ports are dropped.
    Percent-escapes are left untouched, so equality is plain string
    equality on the normalized form.
    """

    __slots__ = ()

    def __new__(cls, value: str) -> "Iri":
        if isinstance(value, Iri):
            return value
        if not isinstance(value, str) or not value:
            raise InvalidIriError("IRI must be a non-empty string")
        if _WHITESPACE.search(value):
            raise InvalidIriError(f"IRI contains whitespace: {value!r}")
        return super().__new__(cls, _normalize(value))

    def __repr__(self) -> str:
        return f"Iri({str.__repr__(self)})"


def is_absolute(ref: str) -> bool:
    return _SCHEME.match(ref) is not None


def resolve(ref: str, base: str) -> Iri:
    """Resolve ``ref`` against ``base``; absolute refs are taken as-is."""
    if is_absolute(ref):
        return Iri(ref)
    return Iri(urljoin(base, ref))

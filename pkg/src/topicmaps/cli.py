"""tmctl: load, validate, merge, query, search, export and summarize XTM maps.

Exit codes:
  0 = success
  1 = diagnostics with error severity (including unreadable XTM)
  2 = bad arguments or query text
  3 = I/O failure
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .export import map_to_json
from .index import build_index, index_stats, search
from .merge import merge_maps
from .query import QuerySyntaxError, eval_query, parse_query
from .validate import format_diagnostics, has_errors, validate
from .xtm import XtmParseError, load_file, serialize_xtm

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_IO = 3


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _Exit(EXIT_USAGE)


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _context(text):
    if text is None:
        return None
    return frozenset(p.strip() for p in text.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="tmctl", description="Topic map tool for XTM 1.0 documents.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_ArgumentParser)
    sub.required = True

    v = sub.add_parser("validate", help="report structural diagnostics")
    v.add_argument("file")

    m = sub.add_parser("merge", help="merge two maps")
    m.add_argument("a")
    m.add_argument("b")
    m.add_argument("-o", dest="out", required=True, metavar="OUT")
    m.add_argument("--report", metavar="REPORT")

    q = sub.add_parser("query", help="evaluate a query")
    q.add_argument("-m", dest="map", required=True, metavar="FILE")
    q.add_argument("query")
    q.add_argument("--context", metavar="IDS")

    s = sub.add_parser("search", help="search topic names")
    s.add_argument("-m", dest="map", required=True, metavar="FILE")
    s.add_argument("terms")
    s.add_argument("--type", dest="type_filter", metavar="ID")
    s.add_argument("--context", metavar="IDS")
    s.add_argument("--limit", type=_positive, default=10, metavar="N")

    e = sub.add_parser("export", help="write the map as XTM or JSON")
    e.add_argument("-m", dest="map", required=True, metavar="FILE")
    e.add_argument("--format", required=True, choices=["xtm", "json"])

    st = sub.add_parser("stats", help="counts and index summary")
    st.add_argument("-m", dest="map", required=True, metavar="FILE")
    return p


def _load(path, out, err, to_stdout=False):
    try:
        return load_file(path)
    except OSError as exc:
        err.write(f"tmctl: cannot read {path}: {exc.strerror or exc}\n")
        raise _Exit(EXIT_IO)
    except XtmParseError as exc:
        stream = out if to_stdout else err
        for d in exc.diagnostics:
            if d.severity == "error":
                stream.write(f"ERROR {d.code} {path}:{d.line}:{d.column}: {d.message}\n")
        raise _Exit(EXIT_DIAGNOSTICS)


def _write(path, data: bytes, err):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        err.write(f"tmctl: cannot write {path}: {exc.strerror or exc}\n")
        raise _Exit(EXIT_IO)


# parser warnings that the validator reports again under its own codes
_RESTATED = {"IMPLICIT_TOPIC", "EMPTY_SCOPE"}


def _cmd_validate(args, out, err):
    doc = _load(args.file, out, err, to_stdout=True)
    for d in doc.diagnostics:
        if d.code not in _RESTATED:
            out.write(f"{d.severity.upper()} {d.code} {d.line}:{d.column}: {d.message}\n")
    diags = validate(doc.map)
    out.write(format_diagnostics(diags))
    return EXIT_DIAGNOSTICS if has_errors(diags) else EXIT_OK


def _cmd_merge(args, out, err):
    a = _load(args.a, out, err).map
    b = _load(args.b, out, err).map
    merged, report = merge_maps(a, b)
    _write(args.out, serialize_xtm(merged), err)
    for old, new in sorted(report.renamed.items()):
        err.write(f"info: renamed colliding id {old} -> {new}\n")
    for note in report.notes:
        err.write(f"info: {note}\n")
    if args.report:
        _write(args.report, report.to_text().encode("utf-8"), err)
    else:
        out.write(report.to_text())
    return EXIT_OK


def _cmd_query(args, out, err):
    try:
        q = parse_query(args.query)
    except QuerySyntaxError as exc:
        err.write(f"tmctl: query syntax error: {exc}\n")
        return EXIT_USAGE
    tm = _load(args.map, out, err).map
    rs = eval_query(tm, q, _context(args.context))
    for msg in rs.diagnostics:
        err.write(f"info: {msg}\n")
    for tid in rs.topics:
        names = " | ".join(n.value for n in rs.matched_names[tid])
        out.write(f"{tid}\t{names}\n" if names else f"{tid}\n")
    return EXIT_OK


def format_hits(hits) -> str:
    header = ("RANK", "SCORE", "TOPIC", "NAME", "OCCURRENCES")
    rows = [
        (str(rank), f"{float(h.score):.3f}", h.topic,
         h.matched_names[0].value if h.matched_names else "", str(len(h.occurrences)))
        for rank, h in enumerate(hits, 1)
    ]
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    lines = []
    for r in [header, *rows]:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "".join(f"{line}\n" for line in lines)


def _cmd_search(args, out, err):
    tm = _load(args.map, out, err).map
    hits = search(build_index(tm), tm, args.terms, args.type_filter, _context(args.context), args.limit)
    out.write(format_hits(hits))
    return EXIT_OK


def _cmd_export(args, out, err):
    tm = _load(args.map, out, err).map
    if args.format == "xtm":
        out.write(serialize_xtm(tm).decode("utf-8"))
    else:
        out.write(map_to_json(tm))
    return EXIT_OK


def _cmd_stats(args, out, err):
    tm = _load(args.map, out, err).map
    st = index_stats(build_index(tm))
    out.write(
        f"topics: {tm.topic_count}\n"
        f"associations: {len(tm.associations)}\n"
        f"occurrences: {tm.occurrence_count()}\n"
        f"index terms: {st.terms}\n"
        f"index postings: {st.postings}\n"
        f"index topics covered: {st.topics}\n"
    )
    return EXIT_OK


COMMANDS = {
    "validate": _cmd_validate,
    "merge": _cmd_merge,
    "query": _cmd_query,
    "search": _cmd_search,
    "export": _cmd_export,
    "stats": _cmd_stats,
}


def run(argv, stdout=None, stderr=None) -> int:
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    saved = sys.stderr
    sys.stderr = err  # argparse writes usage here
    try:
        args = build_parser().parse_args(list(argv))
        return COMMANDS[args.command](args, out, err)
    except _Exit as exc:
        return exc.code
    finally:
        sys.stderr = saved


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

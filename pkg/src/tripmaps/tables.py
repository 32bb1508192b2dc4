"""Loader for the bundled closed-form table files.

Each ``tables/*.tbl`` file holds one expression per line in the format

    sigma,tau0,tau1 | kind | expression

with the expression grammar of :mod:`tripmaps.expressions`.  The bundled
directory can be overridden with the ``TRIP_TABLES_DIR`` environment
variable, which is consulted on every load (not cached at import time).
"""

import os

from .core import parse_triple
from .expressions import ClosedForm

TABLE_KINDS = {
    "appendix_a": ("map_x", "map_y"),
    "appendix_b": ("weight", "branch_x", "branch_y"),
    "banach": ("g", "summand"),
    "eigenfunctions": ("eigenfunction",),
    "densities": ("r",),
    "ljh": ("l", "j", "h"),
}

TABLE_NAMES = tuple(sorted(TABLE_KINDS))

_BUNDLED_DIR = os.path.join(os.path.dirname(__file__), "tables")


class DataFileMissing(FileNotFoundError):
    pass


def tables_dir():
    return os.environ.get("TRIP_TABLES_DIR") or _BUNDLED_DIR


def table_path(name):
    if name not in TABLE_KINDS:
        raise KeyError("unknown table %r (have %s)" % (name, TABLE_NAMES))
    return os.path.join(tables_dir(), name + ".tbl")


_cache = {}


def load_table(name):
    """Return {triple: {kind: ClosedForm}} for one table file."""
    path = table_path(name)
    key = os.path.abspath(path)
    if key in _cache:
        return _cache[key]
    if not os.path.exists(path):
        raise DataFileMissing(path)
    kinds = TABLE_KINDS[name]
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 3:
                raise ValueError("%s:%d: expected 3 fields" % (path, ln))
            triple = parse_triple(parts[0])
            kind = parts[1]
            if kind not in kinds:
                raise ValueError(
                    "%s:%d: kind %r not in %s" % (path, ln, kind, kinds))
            row = out.setdefault(triple, {})
            if kind in row:
                raise ValueError(
                    "%s:%d: duplicate %s for %s" % (path, ln, kind, parts[0]))
            row[kind] = ClosedForm(parts[2])
    for triple, row in out.items():
        missing = [k for k in kinds if k not in row]
        if missing:
            raise ValueError(
                "%s: triple %s missing kinds %s" % (path, triple, missing))
    _cache[key] = out
    return out


def lookup(name, triple):
    """Row dict for one triple, or None if the table has no such row."""
    return load_table(name).get(tuple(triple))


def export_text(name):
    """Canonical re-emission of a table (reparses to identical ASTs)."""
    table = load_table(name)
    lines = []
    for triple in sorted(table, key=_triple_sort_key):
        for kind in TABLE_KINDS[name]:
            lines.append(
                "%s | %s | %s" % (",".join(triple), kind, table[triple][kind]))
    return "\n".join(lines) + "\n"


_S3_ORDER = {"e": 0, "12": 1, "13": 2, "23": 3, "123": 4, "132": 5}


def _triple_sort_key(triple):
    return tuple(_S3_ORDER[name] for name in triple)

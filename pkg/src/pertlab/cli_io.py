"""Versioned JSON document format for every object the tools exchange.

One envelope shape for everything: {"format_version", "kind", "payload"}.
Matrix entries travel as decimal integer strings so arbitrary precision
survives any JSON implementation; structural integers (ranks, degrees,
weights) stay plain.  Parsing is strict: unknown fields, wrong types,
float literals and version mismatches are all rejected, the first two
because silent tolerance hides author mistakes, the floats because this
package has no approximate numbers anywhere.

Serialization is canonical (sorted keys, fixed indentation), so equal
objects produce byte-equal documents and golden files diff cleanly.
"""

from __future__ import annotations

import json

from .chaincore import ChainComplex, GradedMap
from .exactlin import IntMatrix
from .operad_sym import OperadElement, parse_element, render_element
from .sdr_bpl import Perturbation, SdrData
from .she_obstruction import HeData, SheData

FORMAT_VERSION = "1"
KINDS = ("complex", "map", "sdr", "he", "she", "perturbation", "operad-element")


class DocumentError(ValueError):
    """Malformed document; message carries position info when available."""


def _position(text: str, offset: int) -> str:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return f"line {line}, column {col}"


def _reject_float_literals(text: str) -> None:
    """Find unquoted numeric literals that are not plain integers.

    json.loads would accept them and lose exactness silently, and its
    parse_float hook sees no position, so this pre-scan owns the error."""
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == '"':
            i += 1
            while i < n:
                if text[i] == "\\":
                    i += 2
                    continue
                if text[i] == '"':
                    break
                i += 1
            i += 1
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            start = i
            i += 1
            bad = False
            while i < n and (text[i].isdigit() or text[i] in ".eE+-"):
                if text[i] in ".eE":
                    bad = True
                i += 1
            if bad:
                raise DocumentError(
                    f"non-integer numeric literal {text[start:i]!r} at {_position(text, start)}"
                )
            continue
        i += 1


def _require_keys(obj: dict, keys: set[str], where: str) -> None:
    got = set(obj)
    if got != keys:
        missing = sorted(keys - got)
        extra = sorted(got - keys)
        parts = []
        if missing:
            parts.append(f"missing {missing}")
        if extra:
            parts.append(f"unknown {extra}")
        raise DocumentError(f"{where}: " + ", ".join(parts))


def _int(v, where: str) -> int:
    if type(v) is not int:
        raise DocumentError(f"{where}: expected an integer, got {v!r}")
    return v


def _entry(v, where: str) -> int:
    if type(v) is not str or not v or not v.lstrip("-").isdigit():
        raise DocumentError(f"{where}: matrix entries are decimal integer strings, got {v!r}")
    return int(v)


def _rows_to_matrix(rows, nrows: int, ncols: int, where: str) -> IntMatrix:
    if type(rows) is not list or len(rows) != nrows:
        raise DocumentError(f"{where}: expected {nrows} rows")
    flat: list[int] = []
    for i, row in enumerate(rows):
        if type(row) is not list or len(row) != ncols:
            raise DocumentError(f"{where}: row {i} must have {ncols} entries")
        flat.extend(_entry(v, f"{where} row {i}") for v in row)
    return IntMatrix(nrows, ncols, tuple(flat))


def _matrix_to_rows(m: IntMatrix) -> list[list[str]]:
    return [[str(m.entry(i, j)) for j in range(m.cols)] for i in range(m.rows)]


# complex


def _complex_body(c: ChainComplex) -> dict:
    return {
        "degree_lo": c.degree_lo,
        "ranks": list(c.ranks),
        "weights": [list(w) for w in c.weights],
        "diffs": [_matrix_to_rows(m) for m in c.diffs],
        "max_weight": c.max_weight,
    }


def _complex_from_body(body, where: str = "complex") -> ChainComplex:
    if type(body) is not dict:
        raise DocumentError(f"{where}: expected an object")
    _require_keys(body, {"degree_lo", "ranks", "weights", "diffs", "max_weight"}, where)
    lo = _int(body["degree_lo"], f"{where}.degree_lo")
    ranks = body["ranks"]
    if type(ranks) is not list or not ranks:
        raise DocumentError(f"{where}.ranks: expected a nonempty list")
    ranks = tuple(_int(r, f"{where}.ranks") for r in ranks)
    weights_raw = body["weights"]
    if type(weights_raw) is not list or len(weights_raw) != len(ranks):
        raise DocumentError(f"{where}.weights: expected one list per degree")
    weights = tuple(
        tuple(_int(w, f"{where}.weights[{t}]") for w in row) for t, row in enumerate(weights_raw)
    )
    diffs_raw = body["diffs"]
    if type(diffs_raw) is not list or len(diffs_raw) != len(ranks) - 1:
        raise DocumentError(f"{where}.diffs: expected one block per adjacent degree pair")
    diffs = tuple(
        _rows_to_matrix(rows, ranks[t], ranks[t + 1], f"{where}.diffs[{t}]")
        for t, rows in enumerate(diffs_raw)
    )
    return ChainComplex(
        lo, lo + len(ranks) - 1, ranks, weights, diffs,
        _int(body["max_weight"], f"{where}.max_weight"),
    )


# maps, bound to already-known complexes


def _map_body(f: GradedMap) -> dict:
    return {
        "degree": f.degree,
        "blocks": [{"at": n, "rows": _matrix_to_rows(m)} for n, m in f.blocks],
    }


def _map_from_body(body, src: ChainComplex, tgt: ChainComplex, where: str) -> GradedMap:
    if type(body) is not dict:
        raise DocumentError(f"{where}: expected an object")
    _require_keys(body, {"degree", "blocks"}, where)
    degree = _int(body["degree"], f"{where}.degree")
    raw = body["blocks"]
    if type(raw) is not list:
        raise DocumentError(f"{where}.blocks: expected a list")
    blocks: dict[int, IntMatrix] = {}
    for t, item in enumerate(raw):
        if type(item) is not dict:
            raise DocumentError(f"{where}.blocks[{t}]: expected an object")
        _require_keys(item, {"at", "rows"}, f"{where}.blocks[{t}]")
        n = _int(item["at"], f"{where}.blocks[{t}].at")
        if n in blocks:
            raise DocumentError(f"{where}.blocks[{t}]: duplicate block at degree {n}")
        blocks[n] = _rows_to_matrix(
            item["rows"], tgt.rank_at(n + degree), src.rank_at(n), f"{where}.blocks[{t}]"
        )
    try:
        return GradedMap.from_blocks(src, tgt, degree, blocks)
    except ValueError as e:
        raise DocumentError(f"{where}: {e}") from None


# kind payloads


def _payload(obj) -> tuple[str, dict]:
    if isinstance(obj, ChainComplex):
        return "complex", _complex_body(obj)
    if isinstance(obj, GradedMap):
        return "map", {
            "source": _complex_body(obj.source),
            "target": _complex_body(obj.target),
            **_map_body(obj),
        }
    if isinstance(obj, SdrData):
        return "sdr", {
            "big": _complex_body(obj.M),
            "small": _complex_body(obj.N),
            "f": _map_body(obj.F),
            "g": _map_body(obj.G),
            "h": _map_body(obj.H),
        }
    if isinstance(obj, HeData):
        return "he", {
            "big": _complex_body(obj.M),
            "small": _complex_body(obj.N),
            "f": _map_body(obj.F),
            "g": _map_body(obj.G),
            "h": _map_body(obj.H),
            "l": _map_body(obj.L),
        }
    if isinstance(obj, SheData):
        return "she", {
            "big": _complex_body(obj.M),
            "small": _complex_body(obj.N),
            "index_cap": obj.index_cap,
            "f_even": [_map_body(f) for f in obj.F_even],
            "g_even": [_map_body(f) for f in obj.G_even],
            "h_odd": [_map_body(f) for f in obj.H_odd],
            "l_odd": [_map_body(f) for f in obj.L_odd],
        }
    if isinstance(obj, Perturbation):
        return "perturbation", {
            "base": _complex_body(obj.base),
            "delta": _map_body(obj.delta),
        }
    if isinstance(obj, OperadElement):
        return "operad-element", {
            "ambient": obj.ambient,
            "element": render_element(obj),
        }
    raise TypeError(f"no document kind for {type(obj).__name__}")


def serialize_document(obj) -> str:
    kind, payload = _payload(obj)
    env = {"format_version": FORMAT_VERSION, "kind": kind, "payload": payload}
    return json.dumps(env, indent=2, sort_keys=True) + "\n"


def _maps_list(body, key: str, src, tgt, degree_of, where: str) -> tuple[GradedMap, ...]:
    raw = body[key]
    if type(raw) is not list:
        raise DocumentError(f"{where}.{key}: expected a list")
    out = []
    for t, item in enumerate(raw):
        f = _map_from_body(item, src, tgt, f"{where}.{key}[{t}]")
        if f.degree != degree_of(t):
            raise DocumentError(f"{where}.{key}[{t}]: degree {f.degree}, expected {degree_of(t)}")
        out.append(f)
    return tuple(out)


def parse_document(text: str):
    """Parse one envelope into its typed object (see KINDS)."""
    _reject_float_literals(text)
    try:
        env = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{e.msg} at line {e.lineno}, column {e.colno}") from None
    if type(env) is not dict:
        raise DocumentError("envelope: expected an object")
    _require_keys(env, {"format_version", "kind", "payload"}, "envelope")
    if env["format_version"] != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {env['format_version']!r}")
    kind = env["kind"]
    if kind not in KINDS:
        raise DocumentError(f"unknown kind {kind!r}")
    body = env["payload"]
    if type(body) is not dict:
        raise DocumentError("payload: expected an object")
    if kind == "complex":
        return _complex_from_body(body, "payload")
    if kind == "map":
        _require_keys(body, {"source", "target", "degree", "blocks"}, "payload")
        src = _complex_from_body(body["source"], "payload.source")
        tgt = _complex_from_body(body["target"], "payload.target")
        return _map_from_body(
            {"degree": body["degree"], "blocks": body["blocks"]}, src, tgt, "payload"
        )
    if kind == "sdr":
        _require_keys(body, {"big", "small", "f", "g", "h"}, "payload")
        big = _complex_from_body(body["big"], "payload.big")
        small = _complex_from_body(body["small"], "payload.small")
        return SdrData(
            big, small,
            _map_from_body(body["f"], big, small, "payload.f"),
            _map_from_body(body["g"], small, big, "payload.g"),
            _map_from_body(body["h"], big, big, "payload.h"),
        )
    if kind == "he":
        _require_keys(body, {"big", "small", "f", "g", "h", "l"}, "payload")
        big = _complex_from_body(body["big"], "payload.big")
        small = _complex_from_body(body["small"], "payload.small")
        return HeData(
            big, small,
            _map_from_body(body["f"], big, small, "payload.f"),
            _map_from_body(body["g"], small, big, "payload.g"),
            _map_from_body(body["h"], big, big, "payload.h"),
            _map_from_body(body["l"], small, small, "payload.l"),
        )
    if kind == "she":
        _require_keys(
            body, {"big", "small", "index_cap", "f_even", "g_even", "h_odd", "l_odd"}, "payload"
        )
        big = _complex_from_body(body["big"], "payload.big")
        small = _complex_from_body(body["small"], "payload.small")
        cap = _int(body["index_cap"], "payload.index_cap")
        return SheData(
            big, small, cap,
            _maps_list(body, "f_even", big, small, lambda t: 2 * t, "payload"),
            _maps_list(body, "g_even", small, big, lambda t: 2 * t, "payload"),
            _maps_list(body, "h_odd", big, big, lambda t: 2 * t + 1, "payload"),
            _maps_list(body, "l_odd", small, small, lambda t: 2 * t + 1, "payload"),
        )
    if kind == "perturbation":
        _require_keys(body, {"base", "delta"}, "payload")
        base = _complex_from_body(body["base"], "payload.base")
        return Perturbation(base, _map_from_body(body["delta"], base, base, "payload.delta"))
    # operad-element
    _require_keys(body, {"ambient", "element"}, "payload")
    ambient = body["ambient"]
    if type(ambient) is not str:
        raise DocumentError("payload.ambient: expected a string")
    element_text = body["element"]
    if type(element_text) is not str:
        raise DocumentError("payload.element: expected a string")
    try:
        return parse_element(element_text, ambient)
    except ValueError as e:
        raise DocumentError(f"payload.element: {e}") from None


def serialize_bundle(documents: dict) -> str:
    """A named set of envelopes in one file (the fixture generator's output)."""
    body = {}
    for name in sorted(documents):
        kind, payload = _payload(documents[name])
        body[name] = {"format_version": FORMAT_VERSION, "kind": kind, "payload": payload}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"

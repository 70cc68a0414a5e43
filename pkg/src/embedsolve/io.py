"""Graph readers and CSV/JSON artifact writers."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .graphs import complete_graph, path_graph, star_graph, truncated_icosahedron
from .spectral_core import InteractionGraph

FLOAT_FMT = "%.17g"
BUILTINS = ("c60", "complete:M", "path:M", "star:M")


class GraphFormatError(ValueError):
    """Unreadable or invalid graph input."""


def _graph(m, edges, where: str) -> InteractionGraph:
    try:
        return InteractionGraph(int(m), [tuple(int(v) for v in e) for e in edges])
    except (TypeError, ValueError) as exc:
        raise GraphFormatError(f"{where}: {exc}") from None


def parse_graph_json(text: str, name: str = "<json>") -> InteractionGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{name}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict) or "m" not in data or "edges" not in data:
        raise GraphFormatError(f"{name}: expected an object with keys 'm' and 'edges'")
    m, edges = data["m"], data["edges"]
    if not isinstance(m, int) or isinstance(m, bool):
        raise GraphFormatError(f"{name}: 'm' must be an integer")
    if not isinstance(edges, list):
        raise GraphFormatError(f"{name}: 'edges' must be a list")
    for idx, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in e)):
            raise GraphFormatError(f"{name}: edge #{idx + 1} is not a pair of integers: {e!r}")
    return _graph(m, edges, name)


def parse_edge_list(text: str, name: str = "<edges>") -> InteractionGraph:
    """First significant line ``m``, then one ``i j`` pair per line; ``#`` starts a comment."""
    m = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise GraphFormatError(f"{name}:{lineno}: expected integers, got {line!r}") from None
        if m is None:
            if len(nums) != 1:
                raise GraphFormatError(f"{name}:{lineno}: first line must hold the vertex count m")
            m = nums[0]
            continue
        if len(nums) != 2:
            raise GraphFormatError(f"{name}:{lineno}: expected an edge 'i j', got {line!r}")
        i, j = nums
        if not (1 <= i <= m and 1 <= j <= m):
            raise GraphFormatError(f"{name}:{lineno}: vertex out of range 1..{m} in {line!r}")
        if i == j:
            raise GraphFormatError(f"{name}:{lineno}: self-loop {line!r}")
        edges.append((i, j))
    if m is None:
        raise GraphFormatError(f"{name}: empty graph file")
    return _graph(m, edges, name)


def builtin_graph(spec: str) -> InteractionGraph:
    kind, _, arg = spec.partition(":")
    try:
        if kind == "c60" and not arg:
            return truncated_icosahedron()
        makers = {"complete": complete_graph, "path": path_graph, "star": star_graph}
        if kind in makers:
            return makers[kind](int(arg))
    except ValueError as exc:
        raise GraphFormatError(f"builtin graph {spec!r}: {exc}") from None
    raise GraphFormatError(f"unknown builtin graph {spec!r}; choose from {', '.join(BUILTINS)}")


def read_graph(source: str) -> InteractionGraph:
    """A graph from a JSON or edge-list file, or ``builtin:<name>``."""
    if source.startswith("builtin:"):
        return builtin_graph(source[len("builtin:"):])
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GraphFormatError(f"{source}: {exc.strerror}") from None
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        return parse_graph_json(text, source)
    return parse_edge_list(text, source)


def graph_to_json(g: InteractionGraph) -> str:
    return json.dumps({"m": g.m, "edges": [list(e) for e in g.edges]})


# ------------------------------------------------------------------ output


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def render_json(columns, rows, meta) -> str:
    body = {"meta": _jsonable(meta), "columns": list(columns),
            "rows": [[_jsonable(v) for v in r] for r in rows]}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def write_artifact(columns, rows, meta: dict, out: str | None = None, fmt_name: str = "csv", stream=None) -> None:
    """CSV (with a ``.meta.json`` sidecar, or a leading ``# meta:`` line on
    stdout) or a single JSON document holding the metadata."""
    stream = stream or sys.stdout
    meta_text = json.dumps(_jsonable(meta), sort_keys=True)
    if fmt_name == "json":
        text = render_json(columns, rows, meta)
    else:
        text = render_csv(columns, rows)
        if out is None:
            text = f"# meta: {meta_text}\r\n" + text
    if out is None:
        stream.write(text)
        return
    Path(out).write_text(text, newline="")
    if fmt_name == "csv":
        Path(out + ".meta.json").write_text(meta_text + "\n")


def export_matrix_csv(T, out=None) -> str:
    text = "\r\n".join(",".join(FLOAT_FMT % x for x in row) for row in np.asarray(T, dtype=float)) + "\r\n"
    if out is not None:
        Path(out).write_text(text, newline="")
    return text

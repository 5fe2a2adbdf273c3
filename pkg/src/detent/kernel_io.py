"""Kernel files (``.dk``).

Line 1 is a JSON header.  With ``"encoding": "binary"`` the matrix lives in
a sidecar file of little-endian float64 values in row-major order; with
``"encoding": "csv"`` the remaining lines of the ``.dk`` file are the rows,
written with ``repr`` so every value round-trips exactly.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import kernels
from .errors import DetentError, FormatError
from .graph import Edge, Graph
from .kernels import GroundSet, Kernel, validate_kernel

FORMAT = "detent-kernel"
VERSION = 1
CSV_MAX_SIZE = 16


def _graph_dict(g: Graph | None):
    if g is None:
        return None
    return {
        "vertex_count": g.vertex_count,
        "degree_bound": g.degree_bound,
        "edges": [[u, v, w] for u, v, w in g.edges],
    }


def _graph_from(d, where):
    try:
        edges = tuple(Edge(int(u), int(v), float(w)) for u, v, w in d["edges"])
        return Graph(int(d["vertex_count"]), edges, int(d["degree_bound"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad {where} description in header: {exc}", 0) from None


def write_kernel(path, k: Kernel, encoding: str | None = None) -> None:
    path = os.fspath(path)
    if encoding is None:
        encoding = "csv" if k.size <= CSV_MAX_SIZE else "binary"
    header = {
        "format": FORMAT,
        "version": VERSION,
        "size": k.size,
        "n_labels": k.ground.n_labels,
        "class": k.kind,
        "tolerances": {
            "symmetry": kernels.SYMMETRY_TOL,
            "contraction": kernels.CONTRACTION_TOL,
            "projection": kernels.PROJECTION_TOL,
        },
        "base_graph": _graph_dict(k.ground.base_graph),
        "source_graph": _graph_dict(k.ground.source_graph),
        "encoding": encoding,
    }
    m = np.ascontiguousarray(k.matrix, dtype="<f8")
    if encoding == "binary":
        sidecar = os.path.basename(path) + ".bin"
        header["sidecar"] = sidecar
        with open(os.path.join(os.path.dirname(path), sidecar), "wb") as fh:
            fh.write(m.tobytes(order="C"))
        body = ""
    elif encoding == "csv":
        body = "".join(",".join(repr(float(x)) for x in row) + "\n" for row in m)
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        fh.write(body)


def read_kernel(path) -> Kernel:
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read kernel file {path}: {exc}") from None
    nl = raw.find(b"\n")
    head_bytes = raw if nl < 0 else raw[:nl]
    try:
        header = json.loads(head_bytes.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise FormatError("kernel header is not UTF-8", exc.start) from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"kernel header is not valid JSON: {exc.msg}", exc.pos) from None
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise FormatError(f"not a {FORMAT} file", 0)
    try:
        size = int(header["size"])
        n_labels = int(header["n_labels"])
        encoding = header["encoding"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"missing or bad header field: {exc}", 0) from None
    if size < 0:
        raise FormatError("negative kernel size", 0)
    base = _graph_from(header.get("base_graph"), "base_graph") if header.get("base_graph") else None
    if base is None:
        raise FormatError("header lacks base_graph", 0)
    src = header.get("source_graph")
    source = _graph_from(src, "source_graph") if src else None

    body_start = len(head_bytes) + 1
    if encoding == "binary":
        sidecar = header.get("sidecar")
        if not isinstance(sidecar, str):
            raise FormatError("binary kernel header lacks 'sidecar'", 0)
        spath = os.path.join(os.path.dirname(path), sidecar)
        try:
            with open(spath, "rb") as fh:
                blob = fh.read()
        except OSError as exc:
            raise FormatError(f"cannot read sidecar {spath}: {exc}") from None
        want = 8 * size * size
        if len(blob) != want:
            raise FormatError(
                f"sidecar {sidecar} holds {len(blob)} bytes, expected {want}", min(len(blob), want)
            )
        m = np.frombuffer(blob, dtype="<f8").reshape(size, size).astype(np.float64)
    elif encoding == "csv":
        m = _parse_csv(raw, body_start, size)
    else:
        raise FormatError(f"unknown encoding {encoding!r}", 0)

    try:
        ground = GroundSet(base, n_labels, source)
        k = validate_kernel(m, ground, clip=False)
    except DetentError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"kernel content rejected: {exc}", body_start) from None
    return k


def _parse_csv(raw: bytes, start: int, size: int) -> np.ndarray:
    m = np.empty((size, size))
    pos = start
    lines = raw[start:].split(b"\n")
    rows = 0
    for line in lines:
        if rows == size:
            if line.strip():
                raise FormatError("extra data after the last kernel row", pos)
            pos += len(line) + 1
            continue
        if not line.strip():
            pos += len(line) + 1
            continue
        fields = line.split(b",")
        if len(fields) != size:
            raise FormatError(f"row {rows} has {len(fields)} fields, expected {size}", pos)
        col = pos
        for j, f in enumerate(fields):
            try:
                m[rows, j] = float(f)
            except ValueError:
                raise FormatError(f"unparsable number in row {rows}, column {j}", col) from None
            col += len(f) + 1
        rows += 1
        pos += len(line) + 1
    if rows != size:
        raise FormatError(f"found {rows} kernel rows, expected {size}", len(raw))
    return m

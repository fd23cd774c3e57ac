"""State-set and report documents.

Both documents are JSON with a fixed key order, one top-level key per line
and one list item per line for the bulky lists, so fixtures diff cleanly.
Floats are written with 17 significant digits, which round-trips binary64
exactly.
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from . import __version__
from .certifier import CertificationReport, CutEntry
from .errors import NonlocError
from .tensor import StateSet, Subspace, superpose

SCHEMA_VERSION = "1"
_SPARSE_CUTOFF = 1e-15


class DocumentError(NonlocError, ValueError):
    """Malformed document; ``location`` points at the first violation."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def _encode(obj: Any) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_lines(doc: dict, expand: tuple = ("states", "entries")) -> str:
    """Line-oriented rendering: one top-level key per line, expanded lists one item per line."""
    lines = ["{"]
    keys = list(doc)
    for n, key in enumerate(keys):
        sep = "," if n < len(keys) - 1 else ""
        value = doc[key]
        if key in expand and isinstance(value, (list, tuple)) and value:
            lines.append(f"{json.dumps(key)}: [")
            for m, item in enumerate(value):
                lines.append(_encode(item) + ("," if m < len(value) - 1 else ""))
            lines.append("]" + sep)
        else:
            lines.append(f"{json.dumps(key)}: {_encode(value)}{sep}")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- state sets -------------------------------------------------------------


def stateset_to_document(states: StateSet) -> dict:
    docs = []
    for s in states:
        terms = [
            {"basis": list(label), "re": float(c.real), "im": float(c.imag)}
            for label, c in s.raw_terms()
        ]
        docs.append({"label": s.label, "terms": terms})
    return {
        "schema_version": SCHEMA_VERSION,
        "label": states.label,
        "dims": list(states.dims),
        "params": dict(states.params),
        "states": docs,
    }


def _require(cond, location, message):
    if not cond:
        raise DocumentError(location, message)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def document_to_stateset(doc: Any) -> StateSet:
    """Validate a state-set document and build the (normalized) set."""
    _require(isinstance(doc, dict), "$", "document must be a JSON object")
    _require(doc.get("schema_version") == SCHEMA_VERSION, "$.schema_version",
             f"expected {SCHEMA_VERSION!r}, got {doc.get('schema_version')!r}")
    label = doc.get("label")
    _require(isinstance(label, str), "$.label", "must be a string")
    dims = doc.get("dims")
    _require(isinstance(dims, list) and dims, "$.dims", "must be a nonempty integer list")
    for i, d in enumerate(dims):
        _require(_is_int(d) and d >= 2, f"$.dims[{i}]", "must be an integer >= 2")
    params = doc.get("params", {})
    _require(isinstance(params, dict), "$.params", "must be an object")
    states = doc.get("states")
    _require(isinstance(states, list) and states, "$.states", "must be a nonempty list")
    built = []
    for si, sdoc in enumerate(states):
        loc = f"$.states[{si}]"
        _require(isinstance(sdoc, dict), loc, "must be an object")
        slabel = sdoc.get("label", "")
        _require(isinstance(slabel, str), loc + ".label", "must be a string")
        terms = sdoc.get("terms")
        _require(isinstance(terms, list) and terms, loc + ".terms", "must be a nonempty list")
        parsed = []
        for ti, t in enumerate(terms):
            tloc = f"{loc}.terms[{ti}]"
            _require(isinstance(t, dict), tloc, "must be an object")
            basis = t.get("basis")
            _require(isinstance(basis, list) and len(basis) == len(dims), tloc + ".basis",
                     f"must be a list of {len(dims)} integers")
            for k, (b, d) in enumerate(zip(basis, dims)):
                _require(_is_int(b) and 0 <= b < d, f"{tloc}.basis[{k}]", f"must be in 0..{d - 1}")
            for part in ("re", "im"):
                _require(_is_real(t.get(part)), f"{tloc}.{part}", "must be a finite number")
            parsed.append((complex(t["re"], t["im"]), tuple(basis)))
        _require(any(c != 0 for c, _ in parsed), loc + ".terms", "all coefficients are zero")
        built.append(superpose(parsed, dims, slabel))
    return StateSet(label, tuple(dims), tuple(built), params)


def canonical_document(doc: dict) -> dict:
    """Re-emit a valid document in canonical form (terms sorted, duplicates merged)."""
    return stateset_to_document(document_to_stateset(doc))


def save_stateset(states: StateSet, path) -> str:
    text = dumps_lines(stateset_to_document(states))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def load_stateset(path) -> StateSet:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    return document_to_stateset(doc)


# -- reports ----------------------------------------------------------------


def _sparse_vectors(sub: Subspace, block_dims) -> list:
    out = []
    for col in sub.basis.T:
        vec = []
        for idx in np.flatnonzero(np.abs(col) > _SPARSE_CUTOFF):
            label = [int(v) for v in np.unravel_index(idx, block_dims)]
            vec.append({"index": int(idx), "basis": label,
                        "re": float(col[idx].real), "im": float(col[idx].imag)})
        out.append(vec)
    return out


def _entry_document(entry: CutEntry, dims) -> dict:
    bip = entry.bipartition
    da = [dims[i] for i in bip.block_a]
    db = [dims[i] for i in bip.block_b]
    witness = None
    if entry.witness is not None:
        w = entry.witness
        witness = {
            "members": list(w.member_indices),
            "effective_dim": w.effective_dim,
            "frame": {
                "dim_a": w.frame.dim_a,
                "dim_b": w.frame.dim_b,
                "basis_a": _sparse_vectors(w.frame.subspace_a, da),
                "basis_b": _sparse_vectors(w.frame.subspace_b, db),
            },
            "schmidt": [[float(v) for v in sd.singular_values] for sd in w.schmidt],
        }
    diag = entry.diagnostics
    opm = None
    if entry.opm:
        opm = {}
        for side, rep in entry.opm.items():
            elim = None
            if rep.eliminator is not None:
                e = rep.eliminator
                elim = {"basis_indices": list(e.basis_indices),
                        "eliminated": list(e.eliminated),
                        "complement_eliminated": list(e.complement_eliminated)}
            opm[side] = {"grouped_dim": rep.grouped_dim, "space_dim": rep.space_dim,
                         "trivial": rep.trivial, "eliminator": elim}
    return {
        "block_a": list(bip.block_a),
        "block_b": list(bip.block_b),
        "verdict": entry.verdict,
        "hinted": entry.hinted,
        "witness": witness,
        "diagnostics": {
            "frame_dims": list(diag.frame_dims),
            "state_ranks": list(diag.state_ranks),
            "candidates": [
                {"members": list(c.members), "frame_dims": list(c.frame_dims), "reason": c.reason}
                for c in diag.candidates
            ],
        },
        "opm": opm,
    }


def report_to_document(report: CertificationReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "nonlocert", "version": __version__},
        "set": {"label": report.label, "params": dict(report.params),
                "dims": list(report.dims), "n_states": report.n_states},
        "premise": report.premise,
        "inference": report.inference,
        "taxonomy": report.taxonomy,
        "tolerances": report.tolerances.as_dict(),
        "entries": [_entry_document(e, report.dims) for e in report.entries],
        "overall": report.overall,
    }


def dumps_report(report: CertificationReport) -> str:
    return dumps_lines(report_to_document(report))

"""JSON sources/channels/witnesses and CSV tables."""
from __future__ import annotations

import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .dist import (
    Alphabet,
    Channel,
    InvalidDistribution,
    JointSource,
    compose_markov,
    make_source,
    validate,
)

RENORM_TOL = 1e-9
SIG_DIGITS = 9


class SourceFormatError(ValueError):
    pass


def _read_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SourceFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _field(doc: dict, key: str, path):
    if key not in doc:
        raise SourceFormatError(f"{path}: missing field {key!r}")
    return doc[key]


def _renormalized(arr: np.ndarray, what: str) -> np.ndarray:
    v = validate(arr, tol=RENORM_TOL)
    if v is not None:
        raise InvalidDistribution(f"{what}: {v}")
    return arr / arr.sum()


def source_from_dict(doc: dict, path="<source>") -> JointSource:
    alph = _field(doc, "alphabets", path)
    try:
        sizes = {k.upper(): int(alph[k.lower()]) for k in "xyz"}
        sizes["E"] = int(alph.get("e", 1))
    except (KeyError, TypeError, ValueError) as exc:
        raise SourceFormatError(f"{path}: bad field 'alphabets': {exc}") from None
    if "pmf" in doc:
        flat = np.asarray(doc["pmf"], dtype=float)
        expect = sizes["X"] * sizes["Y"] * sizes["Z"] * sizes["E"]
        if flat.size != expect:
            raise SourceFormatError(f"{path}: field 'pmf' has {flat.size} entries, expected {expect}")
        return make_source(sizes, _renormalized(flat, f"{path}: pmf"))
    pxyz = np.asarray(_field(doc, "pxyz", path), dtype=float)
    rows = np.asarray(_field(doc, "e_given_y", path), dtype=float)
    expect = sizes["X"] * sizes["Y"] * sizes["Z"]
    if pxyz.size != expect:
        raise SourceFormatError(f"{path}: field 'pxyz' has {pxyz.size} entries, expected {expect}")
    if rows.shape != (sizes["Y"], sizes["E"]):
        raise SourceFormatError(f"{path}: field 'e_given_y' has shape {rows.shape}, expected {(sizes['Y'], sizes['E'])}")
    base = make_source({k: sizes[k] for k in "XYZ"}, _renormalized(pxyz, f"{path}: pxyz"))
    rows = np.vstack([_renormalized(r, f"{path}: e_given_y row {i}") for i, r in enumerate(rows)])
    ch = Channel((base.alphabet("Y"),), Alphabet("E", sizes["E"]), rows)
    return compose_markov(base, ch)


def load_source(path) -> JointSource:
    return source_from_dict(_read_json(path), path)


def source_to_dict(src: JointSource) -> dict:
    sizes = {l.lower(): src.size(l) for l in "XYZE" if src.has(l)}
    return {"alphabets": sizes, "pmf": [float(v) for v in src.pmf.ravel()]}


def fixture_path(name: str) -> Path:
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("seclossless") / "fixtures" / name))


def load_fixture(name: str) -> JointSource:
    return load_source(fixture_path(name))


def channel_to_dict(ch: Channel) -> dict:
    rows = ch.rows.reshape(-1, ch.to_axis.size)
    return {
        "from": {a.name: a.size for a in ch.from_axes},
        "to": {ch.to_axis.name: ch.to_axis.size},
        "rows": [[None if np.isnan(v) else float(v) for v in r] for r in rows],
    }


def channel_from_dict(doc: dict, path="<channel>") -> Channel:
    frm = _field(doc, "from", path)
    to = _field(doc, "to", path)
    if len(to) != 1:
        raise SourceFormatError(f"{path}: field 'to' must name exactly one axis")
    (to_name, to_size), = to.items()
    rows = np.array([[np.nan if v is None else v for v in r] for r in _field(doc, "rows", path)], dtype=float)
    from_axes = tuple(Alphabet(k.upper(), int(v)) for k, v in frm.items())
    shape = tuple(a.size for a in from_axes) + (int(to_size),)
    try:
        rows = rows.reshape(shape)
    except ValueError:
        raise SourceFormatError(f"{path}: field 'rows' cannot be shaped to {shape}") from None
    return Channel(from_axes, Alphabet(to_name.upper(), int(to_size)), rows)


def load_channel(path) -> Channel:
    return channel_from_dict(_read_json(path), path)


def write_json(obj, path):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{SIG_DIGITS}g}"
    return str(v)


def emit_csv(rows, schema, path) -> None:
    """Header plus one line per row, values at 9 significant digits.

    ``rows`` are mappings keyed by the schema columns or sequences in schema order.
    """
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(schema)
    for row in rows:
        values = [row[c] for c in schema] if isinstance(row, dict) else list(row)
        if len(values) != len(schema):
            raise ValueError(f"row has {len(values)} values, schema has {len(schema)}")
        writer.writerow([format_value(v) for v in values])
    if str(path) == "-":
        sys.stdout.write(buf.getvalue())
        return
    try:
        Path(path).write_text(buf.getvalue(), newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))

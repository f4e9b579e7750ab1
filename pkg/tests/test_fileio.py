import json

import numpy as np
import pytest

from seclossless import Mode, budget_grid, compose_markov, emit_csv, load_channel, load_source, region_frontier
from seclossless.dist import Alphabet, Channel, InvalidDistribution, bsc, make_source, marginal
from seclossless.fileio import (
    SourceFormatError, channel_from_dict, channel_to_dict, fixture_path, read_csv, source_to_dict,
)


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


def test_fixtures_load(dsbs, x_eq_y, no_eve, y_const):
    assert dsbs.pmf.shape == (2, 2, 2, 2)
    assert no_eve.size("E") == 1
    assert y_const.size("Y") == 1
    assert np.allclose(marginal(x_eq_y, "XY").pmf, np.diag([0.5, 0.5]))


def test_source_roundtrip(tmp_path, dsbs):
    p = write(tmp_path, "s.json", source_to_dict(dsbs))
    assert np.array_equal(load_source(p).pmf, dsbs.pmf)


def test_sum_09_rejected(tmp_path):
    doc = {"alphabets": {"x": 2, "y": 2, "z": 2}, "pmf": [0.1] * 8 + []}
    doc["pmf"][0] = 0.2
    with pytest.raises(InvalidDistribution, match="sum"):
        load_source(write(tmp_path, "s.json", doc))


def test_small_drift_renormalized(tmp_path):
    vals = [0.125] * 8
    vals[0] += 5e-10
    src = load_source(write(tmp_path, "s.json", {"alphabets": {"x": 2, "y": 2, "z": 2}, "pmf": vals}))
    assert abs(src.pmf.sum() - 1) < 1e-15


def test_negative_rejected(tmp_path):
    vals = [0.25, -0.05, 0.3, 0.1, 0.1, 0.1, 0.1, 0.1]
    with pytest.raises(InvalidDistribution, match="negativity"):
        load_source(write(tmp_path, "s.json", {"alphabets": {"x": 2, "y": 2, "z": 2}, "pmf": vals}))


def test_parse_error_names_line(tmp_path):
    with pytest.raises(SourceFormatError, match="line 2"):
        load_source(write(tmp_path, "s.json", '{"alphabets":\n ]'))


def test_missing_field(tmp_path):
    with pytest.raises(SourceFormatError, match="pxyz"):
        load_source(write(tmp_path, "s.json", {"alphabets": {"x": 2, "y": 2, "z": 2}}))


def test_markov_form_equals_composition(tmp_path):
    rng = np.random.default_rng(0)
    pxyz = rng.dirichlet(np.ones(12))
    rows = rng.dirichlet(np.ones(3), size=2)
    doc = {"alphabets": {"x": 2, "y": 2, "z": 3, "e": 3}, "pxyz": pxyz.tolist(), "e_given_y": rows.tolist()}
    src = load_source(write(tmp_path, "s.json", doc))
    ref = compose_markov(make_source({"X": 2, "Y": 2, "Z": 3}, pxyz),
                         Channel((Alphabet("Y", 2),), Alphabet("E", 3), rows))
    assert np.allclose(src.pmf, ref.pmf, atol=1e-15)


def test_channel_roundtrip(tmp_path):
    ch = Channel((Alphabet("X", 2), Alphabet("Y", 2)), Alphabet("U", 3),
                 np.random.default_rng(1).dirichlet(np.ones(3), size=(2, 2)))
    p = write(tmp_path, "c.json", channel_to_dict(ch))
    back = load_channel(p)
    assert back.from_labels == ("X", "Y") and np.array_equal(back.rows, ch.rows)


def test_channel_undefined_rows():
    rows = np.array([[0.5, 0.5], [np.nan, np.nan]])
    ch = Channel((Alphabet("Y", 2),), Alphabet("U", 2), rows)
    doc = channel_to_dict(ch)
    assert doc["rows"][1] == [None, None]
    assert np.isnan(channel_from_dict(doc).rows[1]).all()


def test_empty_csv_is_header_only(tmp_path):
    p = tmp_path / "e.csv"
    emit_csv([], ["mode", "r_a", "r_c", "delta_raw", "delta_clamped"], p)
    assert p.read_text().splitlines() == ["mode,r_a,r_c,delta_raw,delta_clamped"]


def test_one_point_one_row(tmp_path, dsbs):
    pt = region_frontier(dsbs, Mode.THM1, [(1.0, 1.0)])[0]
    p = tmp_path / "one.csv"
    emit_csv([(pt.mode.value, pt.r_a, pt.r_c, pt.delta_raw, pt.delta)], ["mode", "r_a", "r_c", "delta_raw", "delta_clamped"], p)
    lines = p.read_text().splitlines()
    assert len(lines) == 2 and len(lines[1].split(",")) == 5


def test_frontier_csv_roundtrip(tmp_path, dsbs):
    ra = np.linspace(0.82, 1.0, 5)
    rc = np.linspace(0.0, 1.0, 5)
    pts = region_frontier(dsbs, Mode.COR1, budget_grid(ra, rc))
    schema = ["mode", "r_a", "r_c", "delta_raw", "delta_clamped"]
    p = tmp_path / "f.csv"
    emit_csv([(q.mode.value, q.r_a, q.r_c, q.delta_raw, q.delta) for q in pts], schema, p)
    assert len(p.read_text().splitlines()) == 26
    rows = read_csv(p)
    for q, r in zip(pts, rows):
        for key, val in (("r_a", q.r_a), ("r_c", q.r_c), ("delta_clamped", q.delta)):
            if val is None:
                assert r[key] == ""
                continue
            assert float(r[key]) == float(f"{val:.9g}")
            assert float(r[key]) == pytest.approx(val, rel=1e-8)


def test_csv_undefined_is_empty(tmp_path):
    p = tmp_path / "u.csv"
    emit_csv([{"a": None, "b": 1.5}], ["a", "b"], p)
    assert p.read_text().splitlines()[1] == ",1.5"


def test_csv_schema_mismatch(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([(1, 2)], ["a"], tmp_path / "x.csv")


def test_csv_io_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        emit_csv([], ["a"], bad)


def test_fixture_path_exists():
    assert fixture_path("dsbs").exists()

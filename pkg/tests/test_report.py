import json
import math

import numpy as np
import pytest
from conftest import scored_tables
from hypothesis import given

from trustlens import InvalidInputError, LabelSpace, ScoredTable, TrustParams
from trustlens.report import (
    CSV_FILES,
    SCHEMA_VERSION,
    build_report,
    emit_report,
    load_csv_bundle,
    load_report_json,
    to_json_dict,
)


def _same(a, b):
    return (math.isnan(a) and math.isnan(b)) or a == b


def _assert_docs_equal(a, b, densities=True):
    assert a.label_space == b.label_space
    assert np.array_equal(a.matrix.values, b.matrix.values, equal_nan=True)
    assert np.array_equal(a.matrix.support, b.matrix.support)
    assert np.array_equal(a.spectrum.expected, b.spectrum.expected, equal_nan=True)
    assert np.array_equal(a.spectrum.weights, b.spectrum.weights)
    assert a.summary == b.summary
    assert a.weighting == b.weighting
    if densities:
        assert sorted(a.densities) == sorted(b.densities)
        for z in a.densities:
            for part in ("correct", "incorrect", "unconditional"):
                da, db = getattr(a.densities[z], part), getattr(b.densities[z], part)
                assert np.array_equal(da.values, db.values) and np.array_equal(da.counts, db.counts)


def test_undefined_cells_are_null_and_empty():
    labels = LabelSpace(("a", "b"))
    table = ScoredTable.from_columns([0, 0], [0, 0], [0.6, 0.9])
    doc = build_report(table, labels)
    body = json.loads(emit_report(doc)["report.json"])
    assert body["schema_version"] == SCHEMA_VERSION
    assert body["matrix"]["values"] == [[0.75, None], [None, None]]
    assert body["summary"]["conditional_incorrect"] is None
    assert body["spectrum"]["classes"][1]["expected_trust"] is None
    csvs = emit_report(doc, "csv-bundle")
    assert sorted(csvs) == sorted(CSV_FILES)
    assert csvs["matrix.csv"].decode().splitlines() == ["actor\\oracle,a,b", "a,0.75,", "b,,"]


def test_shortest_round_trip_floats():
    table = ScoredTable.from_columns([0], [0], [0.6])
    text = emit_report(build_report(table, LabelSpace.of_size(2)))["report.json"].decode()
    assert '"net_trust_score":0.6,' in text


def test_uniform_weighting_is_carried_in_spectrum_section():
    labels = LabelSpace.of_size(2)
    table = ScoredTable.from_columns([0, 0, 0, 1], [0, 0, 0, 1], [1.0, 1.0, 1.0, 0.5])
    doc = build_report(table, labels, weighting="uniform")
    body = to_json_dict(doc)
    assert body["spectrum"]["net_trust_score"] == 0.75
    assert body["summary"]["net_trust_score"] == 3.5 / 4


def test_unknown_format_and_schema():
    doc = build_report(ScoredTable.from_columns([0], [0], [0.6]), LabelSpace.of_size(2))
    with pytest.raises(InvalidInputError):
        emit_report(doc, "xml")
    with pytest.raises(InvalidInputError):
        load_report_json(json.dumps({"schema_version": "0.1"}))


@given(scored_tables(max_records=40, max_classes=5))
def test_json_round_trip_is_lossless(case):
    labels, table = case
    params = TrustParams(2.0, 0.5)
    doc = build_report(table, labels, params, metadata={"note": "x"})
    back = load_report_json(emit_report(doc)["report.json"])
    _assert_docs_equal(doc, back)
    assert back.metadata["note"] == "x"
    assert back.matrix.params == params


@given(scored_tables(max_records=40, max_classes=5))
def test_csv_round_trip_is_lossless(case):
    labels, table = case
    doc = build_report(table, labels, density_bins=None)
    back = load_csv_bundle(emit_report(doc, "csv-bundle"))
    _assert_docs_equal(doc, back, densities=False)


def test_csv_bundle_from_directory(tmp_path):
    doc = build_report(ScoredTable.from_columns([0, 1], [0, 0], [0.6, 0.7]), LabelSpace.of_size(3))
    for name, data in emit_report(doc, "csv-bundle").items():
        (tmp_path / name).write_bytes(data)
    assert load_csv_bundle(tmp_path).summary == doc.summary

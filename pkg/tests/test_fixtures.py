# tests/test_fixtures.py

import json
import math

import numpy as np
import pytest

from propagators.errors import FixtureError
from propagators.fixtures import (
    bundled_fixture_path,
    fixture_from_dict,
    load_fixture,
    random_fixture,
    save_fixture,
    split_pair,
)
from propagators.operators import commutator_norm
from utils.serialization import decode_matrix, dumps, encode_matrix, write_csv


def test_bundled_pair_loads_clean():
    fixture = load_fixture(bundled_fixture_path("pair4"))
    A, B = split_pair(fixture.ops)
    assert fixture.name == "pair4"
    assert fixture.dim == 4
    assert fixture.warnings == []
    assert commutator_norm(A, B) > 1e-3
    assert fixture.h.norm() == pytest.approx(1.0)


def test_saved_fixture_loads_back(tmp_path):
    fixture = random_fixture("commuting", 3, 2, seed=7)
    loaded = load_fixture(save_fixture(tmp_path / "f.json", fixture))
    assert loaded.name == fixture.name
    for a, b in zip(loaded.ops, fixture.ops):
        assert np.allclose(a.entries, b.entries, atol=0)
    assert [op.label for op in loaded.ops] == ["A1", "A2"]


def test_random_fixture_is_seeded():
    a = random_fixture("pair", 4, 2, seed=11)
    b = random_fixture("pair", 4, 2, seed=11)
    assert np.array_equal(a.ops[1].entries, b.ops[1].entries)
    assert [op.label for op in a.ops] == ["A", "B"]


def test_unknown_fixture_kind():
    with pytest.raises(FixtureError):
        random_fixture("banded", 4, 2, seed=1)


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"name": "x",\n "operators": [}', encoding="utf-8")
    with pytest.raises(FixtureError) as info:
        load_fixture(path)
    assert "broken.json:2:" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(FixtureError):
        load_fixture(tmp_path / "absent.json")


def test_missing_state_vector():
    data = {"operators": [encode_matrix(np.eye(2))]}
    with pytest.raises(FixtureError, match="missing state vector"):
        fixture_from_dict(data)


def test_dimension_mismatch_between_operator_and_vector():
    data = {"operators": [encode_matrix(np.eye(2))], "h": {"dim": 3, "rows": [1.0, 0.0, 0.0]}}
    with pytest.raises(FixtureError):
        fixture_from_dict(data)


def test_bad_entry_names_location():
    data = {"dim": 2, "rows": [[[1, 0], [0, 0]], [[0, 0], "x"]]}
    with pytest.raises(FixtureError) as info:
        decode_matrix(data, "$.operators[0]")
    assert info.value.location == "$.operators[0].rows[1][1]"


def test_non_hermitian_operator_is_symmetrized_with_warning():
    data = {
        "operators": [{"label": "A", "dim": 2, "rows": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}],
        "h": {"dim": 2, "rows": [[1, 0], [0, 0]]},
    }
    fixture = fixture_from_dict(data)
    assert len(fixture.warnings) == 1
    assert "symmetrized" in fixture.warnings[0]
    assert np.allclose(fixture.ops[0].entries, [[0, 0.5], [0.5, 0]])


def test_split_pair_needs_two_operators():
    fixture = random_fixture("diagonal", 3, 3, seed=2)
    with pytest.raises(FixtureError):
        split_pair(fixture.ops)


def test_dumps_is_sorted_and_json_safe():
    text = dumps({"b": np.float64(math.nan), "a": np.arange(2), "c": complex(1, 2), "d": math.inf})
    data = json.loads(text)
    assert list(data) == ["a", "b", "c", "d"]
    assert data == {"a": [0, 1], "b": "nan", "c": [1.0, 2.0], "d": "inf"}


def test_csv_floats_keep_full_precision(tmp_path):
    path = write_csv(tmp_path / "rows.csv", ["m", "error"], [(8, 0.1 + 0.2)])
    assert path.read_text().splitlines() == ["m,error", "8,0.30000000000000004"]

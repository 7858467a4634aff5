import json

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from conftest import rng_of, seeds
from tcspace.errors import InputError, InvalidBasis
from tcspace.io import (
    basis_from_json,
    basis_to_json,
    coords_from_json,
    mu_from_json,
    read_json,
    space_from_json,
    space_to_json,
)
from tcspace.samples import five_point_basis, five_point_space, random_basis, random_metric_space


def test_edge_list_space():
    data = {"points": ["a", "b", "c"], "edges": [[0, 1, "1/2"], ["b", "c", "3"]], "basepoint": "b"}
    space = space_from_json(data)
    assert space.points[space.basepoint] == "b"
    assert space.d("a", "c") == mpq(7, 2)


def test_matrix_space_roundtrip():
    space = five_point_space()
    again = space_from_json(json.loads(json.dumps(space_to_json(space))))
    assert again == space


@given(seeds, st.integers(min_value=2, max_value=7))
def test_basis_roundtrip(seed, size):
    rng = rng_of(seed)
    space = random_metric_space(rng, size)
    basis = random_basis(rng, space)
    basis = basis.scaled([mpq(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(basis.N)])
    again = basis_from_json(space, json.loads(json.dumps(basis_to_json(basis))))
    assert again.rows == basis.rows
    assert again.rho == basis.rho
    assert again.order.indices == basis.order.indices


def test_five_point_basis_file():
    space = five_point_space()
    data = {"order": ["0", "1", "2", "3", "4"], "rows": [
        {"n": 1, "coeffs": {"0": "1"}}, {"n": 2, "coeffs": {"0": "1"}},
        {"n": 3, "coeffs": {"1": "1/2", "2": "1/2"}}, {"n": 4, "coeffs": {"1": "1/2", "2": "1/2"}}]}
    assert basis_from_json(space, data) == five_point_basis(space)


def test_mu_and_coords():
    space = five_point_space()
    mu = mu_from_json(space, {"mass": {"4": "1", "3": "-1"}})
    assert mu.mass == {"3": -1, "4": 1}
    assert coords_from_json({"coords": [["0", "1/3"]]}) == [[0, mpq(1, 3)]]


@pytest.mark.parametrize("data", [
    {"edges": []},
    {"points": ["a"], "dist": [["x"]]},
    {"points": ["a", "b"], "edges": [[0, 1]]},
    {"points": ["a"], "basepoint": 3, "dist": [["0"]]},
])
def test_bad_space_files(data):
    with pytest.raises(InputError):
        space_from_json(data)


def test_bad_basis_files():
    space = five_point_space()
    with pytest.raises(InputError):
        basis_from_json(space, {"order": list("01234"), "rows": [{"n": 1, "coeffs": {"0": "1"}}]})
    rows = [{"n": n, "coeffs": {"0": "1/2"}} for n in range(1, 5)]
    with pytest.raises(InvalidBasis):
        basis_from_json(space, {"order": list("01234"), "rows": rows})


def test_read_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        read_json(bad)
    with pytest.raises(InputError):
        read_json(tmp_path / "missing.json")
    arr = tmp_path / "arr.json"
    arr.write_text("[]")
    with pytest.raises(InputError):
        read_json(arr)

import json
import stat
from fractions import Fraction

import numpy as np
import pytest

from enharmonic.gallery import fixture
from enharmonic.io import dump_json, dumps, load_network, network_from_json, parse_number, to_plain


def test_parse_number():
    assert parse_number("1/3") == pytest.approx(1 / 3)
    assert parse_number(2) == 2.0
    with pytest.raises(ValueError):
        parse_number("one")


def test_to_plain():
    assert to_plain(Fraction(2, 6)) == "1/3"
    assert to_plain(np.float64(1 / 3)) == 0.333333333333
    assert to_plain(-0.0) == 0.0
    assert to_plain(float("nan")) is None
    assert to_plain({"a": np.arange(2), "b": (np.bool_(True),)}) == {"a": [0, 1], "b": [True]}


def test_network_round_trip(tmp_path):
    fx = fixture("small-graph")
    p = tmp_path / "net.json"
    dump_json(fx, p)
    back = load_network(p)
    assert (back.net.vertices, back.net.edges, back.net.boundary) == (fx.net.vertices, fx.net.edges, fx.net.boundary)
    assert back.u == fx.u
    assert np.array_equal(back.energies, fx.energies)
    assert back.embedding.rotation == fx.embedding.rotation
    assert back.embedding.outer == fx.embedding.outer
    assert dumps(back) == dumps(fx)


def test_network_without_optional_fields():
    fx = network_from_json({"vertices": ["v0", "v1"], "boundary": ["v0", "v1"],
                            "edges": [{"id": "e", "tail": "v1", "head": "v0"}]})
    assert fx.u == {} and fx.energies is None and fx.embedding is None


def test_atomic_write_mode_and_content(tmp_path):
    p = tmp_path / "out.json"
    dump_json({"x": 1}, p)
    assert json.loads(p.read_text()) == {"x": 1}
    assert stat.S_IMODE(p.stat().st_mode) == 0o644
    p.chmod(0o600)
    dump_json({"x": 2}, p)
    assert stat.S_IMODE(p.stat().st_mode) == 0o600
    assert [q.name for q in tmp_path.iterdir()] == ["out.json"]

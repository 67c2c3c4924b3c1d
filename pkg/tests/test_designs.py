import numpy as np
import pytest

from _util import NAMED
from lassocompat.designs import (ALIASES, DesignSpec, build_gram, dump_spec, load_spec, sample_spec)
from lassocompat.errors import AdmissibilityError
from lassocompat.gram import check_fair, write_matrix_csv


@pytest.mark.parametrize("family", NAMED)
def test_sampled_designs_are_fair_grams(family):
    rng = np.random.default_rng(NAMED.index(family))
    for _ in range(5):
        spec = sample_spec(family, rng)
        G = build_gram(spec)
        assert G.p == spec.p
        assert G.lambda_min >= -1e-12
        assert check_fair(G.entries).fair, (family, spec.params)
        assert all(0 <= j < spec.p for j in spec.active_set)


def test_two_var_gram():
    G = build_gram(DesignSpec("TwoVar", {"rho": 0.3}))
    np.testing.assert_array_equal(G.entries, [[1.0, -0.3], [-0.3, 1.0]])


@pytest.mark.parametrize("alias, params", [
    ("twovar", {"rho": 0.5}),
    ("goodcomp", {"rho": 0.6, "C": 2, "tau2": 0.1}),
    ("childparent-sym", {"theta": 0.8, "C": 2}),
])
def test_aliases_normalize(alias, params):
    spec = DesignSpec(alias, params)
    assert spec.family == ALIASES[alias]
    assert DesignSpec(spec.family, params) == spec


@pytest.mark.parametrize("family, params, message", [
    ("TwoVar", {"rho": 1.0}, "rho"),
    ("ParentChildSingle", {"rho": 0.2, "C": 1.6}, "C²φ̂²/2 ≥ 1"),
    ("GoodComp", {"rho": 0.6, "C": 2.0, "tau2": 0.3}, "τ̂²"),
    ("ChildParentSym", {"theta": 0.2, "C": 1.2}, "C²ψ̂²"),
    ("ChildParentGamma", {"theta": 0.1, "gamma3": 0.95}, "ρ̂"),
    ("ChildParentOrthoInactive", {"C": 1.2, "gamma": [0.5, 0.5]}, "γ"),
    ("BlockGoodComp2N", {"rhos": [0.5], "Cs": [1.5, 1.5], "tau2s": [0.1]}, "equal length"),
])
def test_inadmissible_rejected(family, params, message):
    with pytest.raises(AdmissibilityError, match=message):
        build_gram(DesignSpec(family, params))


def test_active_sets():
    assert DesignSpec("PairBlocks", {"rhos": [0.5, 0.5]}).active_set == (0, 1, 2, 3)
    assert DesignSpec("ParentChildBlock2N", {"rhos": [0.5, 0.5], "C": 1.5}).active_set == (0, 1, 2, 3)
    assert DesignSpec("BlockGoodComp2N", {"rhos": [0.6, 0.6], "Cs": [2, 2], "tau2s": [.1, .1]}).active_set \
        == (0, 1, 2, 3)
    assert DesignSpec("GoodComp", {"rho": 0.6, "C": 2, "tau2": 0.1}).active_set == (0, 1)


def test_spec_roundtrip(tmp_path):
    spec = DesignSpec("GoodComp", {"rho": 0.6, "C": 2, "tau2": 0.1})
    dump_spec(spec, tmp_path / "s.json")
    back = load_spec(tmp_path / "s.json")
    assert back.to_dict() == spec.to_dict()
    np.testing.assert_array_equal(build_gram(back).entries, build_gram(spec).entries)


def test_custom_spec_with_matrix_file(tmp_path):
    write_matrix_csv(tmp_path / "g.csv", [[1.0, 0.2], [0.2, 1.0]])
    (tmp_path / "s.json").write_text('{"family": "custom", "params": {"matrix_file": "g.csv"}}')
    spec = load_spec(tmp_path / "s.json")
    assert spec.family == "Custom"
    assert build_gram(spec).entries[0, 1] == 0.2

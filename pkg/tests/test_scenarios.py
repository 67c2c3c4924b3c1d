import json

import pytest

from lassocompat.scenarios import ScenarioError, load_catalog, run_scenario

CATALOG = load_catalog()


def test_catalog_size_and_order():
    assert len(CATALOG) >= 20
    assert list(CATALOG) == sorted(CATALOG)
    kinds = {sc.kind for sc in CATALOG.values()}
    assert kinds == {"exact", "compat", "unique", "coverage"}


@pytest.mark.parametrize("sid", list(CATALOG))
def test_scenario_passes(sid):
    res = run_scenario(CATALOG[sid])
    assert res.passed, res.failures


def test_catalog_disagreeing_with_oracle_is_rejected(tmp_path):
    entry = {"id": "wrong", "kind": "exact", "claim": "", "beta0": [1, 1], "lambda": 0.1,
             "design": {"family": "TwoVar", "params": {"rho": 0.5}},
             "expected": {"penalized_error": 0.05}}
    path = tmp_path / "cat.json"
    path.write_text(json.dumps({"scenarios": [entry]}))
    with pytest.raises(ScenarioError, match="penalized_error"):
        load_catalog(path)


def test_duplicate_ids_rejected(tmp_path):
    entry = {"id": "x", "kind": "compat", "design": {"family": "TwoVar", "params": {"rho": 0.5}},
             "expected": {}}
    path = tmp_path / "cat.json"
    path.write_text(json.dumps({"scenarios": [entry, entry]}))
    with pytest.raises(ScenarioError, match="duplicate"):
        load_catalog(path)

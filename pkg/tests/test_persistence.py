import json
import os

import numpy as np
import pytest

from upliftkit.estimators import (
    AllBaseline, BestBaseline, InteractionUplift, TianUplift, TransformedOutcomeUplift,
    TwoModelUplift,
)
from upliftkit.forest import UpliftForest
from upliftkit.persistence import atomic_write, load_model, model_from_json, model_to_json, \
    save_model
from upliftkit.synth import gen_law7
from upliftkit.tree import UpliftTree


@pytest.fixture(scope="module")
def law7():
    return gen_law7(3000, seed=5).dataset


ESTIMATORS = [
    AllBaseline(), BestBaseline(), TwoModelUplift(), TransformedOutcomeUplift(),
    TianUplift(balance_arms=False), InteractionUplift(ridge=0.1),
    UpliftTree(min_leaf_per_arm=40, honest=True, seed=3),
    UpliftForest(n_trees=3, seed=1, min_leaf_per_arm=40),
]


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_json_round_trip(est, law7):
    est.fit_dataset(law7)
    text = model_to_json(est)
    back = model_from_json(text)
    assert type(back) is type(est)
    assert back.get_params() == est.get_params()
    np.testing.assert_array_equal(back.predict(law7.features), est.predict(law7.features))
    assert model_to_json(back) == text


def test_format_version_checked(law7):
    doc = json.loads(model_to_json(TianUplift().fit_dataset(law7)))
    doc["format_version"] = 99
    with pytest.raises(ValueError, match="format version"):
        model_from_json(json.dumps(doc))


def test_unknown_method_rejected(law7):
    doc = json.loads(model_to_json(TianUplift().fit_dataset(law7)))
    doc["method"] = "nope"
    with pytest.raises(ValueError):
        model_from_json(json.dumps(doc))


def test_save_and_load(tmp_path, law7):
    est = TwoModelUplift().fit_dataset(law7)
    save_model(est, tmp_path / "m.json")
    assert os.listdir(tmp_path) == ["m.json"]
    np.testing.assert_array_equal(load_model(tmp_path / "m.json").predict(law7.features),
                                  est.predict(law7.features))


def test_atomic_write_replaces_and_cleans_up(tmp_path):
    p = tmp_path / "out.txt"
    atomic_write(p, "one\n")
    atomic_write(p, "two\n")
    assert p.read_text() == "two\n"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_atomic_write_failure_leaves_nothing(tmp_path):
    with pytest.raises(TypeError):
        atomic_write(tmp_path / "x.txt", 123)
    assert os.listdir(tmp_path) == []

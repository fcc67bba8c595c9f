import json
import math
import random

import pytest

import gainml


def test_candidates():
    names = gainml.candidate_covariates()
    assert len(names) == 6
    assert names[0] == "V-CTRn"


def test_fit_and_predict():
    rng = random.Random(3)
    x = [[rng.uniform(0, 10)] for _ in range(120)]
    y = [math.sin(r[0]) + rng.gauss(0, 0.05) for r in x]
    model = gainml.fit(x, y)
    assert 3 <= model.k <= 100
    pred = model.predict([[2.0], [5.0]])
    assert abs(pred[0] - math.sin(2.0)) < 0.2
    assert abs(pred[1] - math.sin(5.0)) < 0.2
    assert min(y) <= min(model.predict(x)) and max(model.predict(x)) <= max(y)


def test_interval_and_errors():
    assert gainml.percentile_interval([float(v) for v in range(10, 0, -1)], 0.8) == (2.0, 9.0)
    with pytest.raises(gainml.GainmlError) as err:
        gainml.percentile_interval([], 0.8)
    assert err.value.code == "InvalidArgument"
    assert gainml.exit_code_for("ManifestMissing") == 7


def test_pipeline(tmp_path):
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps({"n_p1": 300, "n_p2": 300, "upgrade_gamma": 1.05, "output_dir": "farm"}))
    farm = gainml.synth(str(scenario), seed=4)
    assert abs(farm["truth"] - 0.05) < 1e-4
    config = farm["analysis_config"]

    with pytest.raises(gainml.GainmlError) as err:
        gainml.period2(config)
    assert err.value.code == "ManifestMissing"

    p1 = gainml.period1(config)
    assert set(p1["variables"]) <= set(gainml.candidate_covariates())
    assert p1["pair"] == ("CTRB", "CTRN")
    report = gainml.period2(config)
    assert len(report["bootstrap"]["results"]) == 10
    assert report["bootstrap"]["ci_low"] <= report["bootstrap"]["ci_high"]
    assert not report["empirical_frequency"]

import json
import math
import random

import pytest

import codecal


def corpus(n, seed=0):
    rng = random.Random(seed)
    conf = [rng.random() for _ in range(n)]
    correct = [rng.random() < c for c in conf]
    return conf, correct


def test_record_round_trip(tmp_path):
    line = json.dumps({
        "record_id": "a1",
        "task": "function_synthesis",
        "generated_text": "return x",
        "token_logprobs": [-0.1, -0.2],
        "reference_text": "return x",
        "test_report": {"passed": 3, "failed": 0, "syntax_ok": True},
    })
    record = codecal.parse_record(line)
    assert record.record_id == "a1"
    assert record.generated_length_chars == 8
    assert codecal.validate_record(record) == []
    assert codecal.label_record(record, "all_pass")
    assert codecal.label_record(record, "exact_match")

    path = tmp_path / "r.jsonl"
    codecal.save_records(str(path), [record])
    assert codecal.load_records(str(path))[0].token_logprobs == record.token_logprobs


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(codecal.DataError):
        codecal.parse_record("{not json")
    with pytest.raises(codecal.IoError):
        codecal.load_records(str(tmp_path / "missing.jsonl"))
    with pytest.raises(ValueError):
        codecal.auc_roc([0.1, 0.2], [True, True])


def test_confidence_measures():
    assert codecal.avg_token_probability([math.log(0.5)] * 3) == pytest.approx(0.5)
    assert codecal.total_sequence_probability([math.log(0.9), math.log(0.6), math.log(0.3)]) == pytest.approx(0.162)
    assert codecal.parse_verbalized(["80%"]) == (0.8, False)
    assert codecal.parse_verbalized(["no idea", "still no idea"]) == (0.5, True)
    value, fallback = codecal.ask_tf_probability([[("True", math.log(0.5)), ("False", math.log(0.4))]], normalized=True)
    assert value == pytest.approx(5 / 9)
    assert not fallback
    assert codecal.length_baseline(12, 4, 20) == pytest.approx(0.5)
    assert codecal.apply_bands(0.95) == "accept"


def test_metrics_against_independent_formulas():
    conf, correct = corpus(500, seed=1)
    brier = sum((c - y) ** 2 for c, y in zip(conf, correct)) / len(conf)
    assert codecal.brier(conf, correct) == pytest.approx(brier, abs=1e-12)

    positives = [c for c, y in zip(conf, correct) if y]
    negatives = [c for c, y in zip(conf, correct) if not y]
    wins = sum((p > q) + 0.5 * (p == q) for p in positives for q in negatives)
    assert codecal.auc_roc(conf, correct) == pytest.approx(wins / (len(positives) * len(negatives)), abs=1e-12)

    bins = codecal.bin_samples(conf, correct)
    assert sum(b["count"] for b in bins) == 500
    ece = sum(b["count"] / 500 * abs(b["corr"] - b["conf"]) for b in bins)
    assert codecal.ece(conf, correct) == pytest.approx(ece, abs=1e-12)

    report = codecal.report(conf, correct)
    assert report["n"] == 500
    assert report["brier_ref"] == pytest.approx(codecal.brier_ref(report["base_rate"]))


def test_rescaling():
    rng = random.Random(2)
    conf = [rng.random() for _ in range(4000)]
    correct = [rng.random() < 1 / (1 + math.exp(-(2 * math.log(max(c, 1e-9)) + 1))) for c in conf]
    slope, intercept = codecal.fit_platt(conf, correct)
    assert abs(slope - 2) < 0.2 and abs(intercept - 1) < 0.2
    assert codecal.apply_platt(2.0, 1.0, 0.5) == pytest.approx(0.40460967519168966)

    scaled = codecal.cross_fold_rescale(conf, correct, k=5, seed=3)
    assert scaled == codecal.cross_fold_rescale(conf, correct, k=5, seed=3)
    assert codecal.ece(scaled, correct) < codecal.ece(conf, correct)

    collapsed, reason = codecal.detect_collapse([0.3] * 10, 0.3, 0.0)
    assert collapsed and "ECE omitted" in reason
    assert codecal.detect_collapse([0.3] * 10, 0.3, 0.07) == (False, None)

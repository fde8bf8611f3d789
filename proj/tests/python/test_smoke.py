import math

import pytest

import propsel


def test_tokenize_splits_punctuation_and_lowercases():
    assert propsel.tokenize("Who founded X-Corp?") == ["who", "founded", "x", "-", "corp", "?"]


def test_edge_counts_match_formula():
    for sizes in ([3, 2], [1], [2, 2, 2], [4, 1, 3]):
        for topo in ("full", "type1", "type2", "type3"):
            nodes, edges = propsel.build_graph(sizes, topo)
            assert nodes == sum(sizes) + 1
            assert len(edges) == propsel.edge_count_formula(sizes, topo)
    assert propsel.edge_count_formula([3, 2], "full") == 10


def test_rank_loss_value_and_gradient():
    loss, grad = propsel.rank_loss([1.0, -1.0], [1, 0])
    assert loss == pytest.approx(0.12692801104297263, abs=1e-12)
    assert sum(grad) == pytest.approx(0.0, abs=1e-12)


def test_ranking_metrics():
    assert propsel.average_precision([0, 1, 1, 0]) == pytest.approx(0.5833333333333333)
    assert propsel.reciprocal_rank([0, 1, 1, 0]) == pytest.approx(0.5)
    assert propsel.compute_map_mrr([[1, 0], [0, 1]]) == pytest.approx((0.75, 0.75))


def test_threshold_metrics_hand_case():
    rows = propsel.threshold_metrics([[0.9, 0.4, 0.6, 0.1]], [[1, 0, 1, 0]], [0.5, 0.3])
    assert rows[0]["precision"] == 1.0 and rows[0]["em"] == 1.0
    assert rows[1]["precision"] == pytest.approx(2 / 3)
    assert rows[1]["f1"] == pytest.approx(0.8)


def test_ingest_rejects_unknown_title():
    record = {
        "_id": "bad",
        "question": "q ?",
        "context": [["A", ["one .", "two ."]]],
        "supporting_facts": [["B", 0]],
    }
    with pytest.raises(ValueError):
        propsel.ingest([record])
    examples, warnings = propsel.ingest([record], strict=False)
    assert examples == [] and len(warnings) == 1


def test_training_on_small_synthetic_corpus():
    records = propsel.generate_synthetic(questions=40, seed=3)
    config = {
        "model": {"embedder": {"dim": 8}, "encoder": {"hidden": 8}, "hops": 1},
        "training": {"max_epochs": 2, "batch_size": 10, "seed": 5},
    }
    summary = propsel.train_and_evaluate(config, records[:30], records[30:])
    assert len(summary["log"]["epochs"]) == 2
    for split in ("train", "dev"):
        assert 0.0 <= summary[split]["map"] <= 1.0
        assert not math.isnan(summary[split]["mrr"])


def test_cli_reports_bad_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": {"hops": 0}}')
    code, _, err = propsel.run_cli("train", "--config", bad, "--data", tmp_path, "--out", tmp_path / "run")
    assert code == 1
    assert "model.hops" in err

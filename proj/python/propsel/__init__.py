"""Python bindings for the Propagate-Selector sentence selector."""

import json

from . import _propsel
from ._propsel import (
    ConfigError,
    DataError,
    NumericError,
    average_precision,
    build_graph,
    compute_map_mrr,
    edge_count_formula,
    rank_loss,
    reciprocal_rank,
    threshold_metrics,
    tokenize,
)

__all__ = [
    "ConfigError",
    "DataError",
    "NumericError",
    "average_precision",
    "build_graph",
    "compute_map_mrr",
    "edge_count_formula",
    "generate_synthetic",
    "ingest",
    "rank_loss",
    "reciprocal_rank",
    "run_cli",
    "threshold_metrics",
    "tokenize",
    "train_and_evaluate",
]


def ingest(records, strict=True):
    """Turn raw HotpotQA-style records into examples. Returns (examples, warnings)."""
    examples, warnings = _propsel.ingest(json.dumps(records), strict)
    return json.loads(examples), list(warnings)


def generate_synthetic(questions=200, seed=7, marker_pairs=10):
    return json.loads(_propsel.generate_synthetic(questions, seed, marker_pairs))


def train_and_evaluate(config, train_records, dev_records, min_freq=1):
    summary = _propsel.train_and_evaluate(
        json.dumps(config), json.dumps(train_records), json.dumps(dev_records), min_freq
    )
    return json.loads(summary)


def run_cli(*args):
    """Run a `propsel` command in-process. Returns (exit_code, stdout, stderr)."""
    return _propsel.run_cli([str(a) for a in args])

"""Unsupervised rank aggregation with the Lovasz-Bregman divergence."""

from ._subrank import (
    InvalidInput,
    InvariantViolation,
    LinearModel,
    NestedModel,
    ParseError,
    Query,
    aggregate_scores,
    baseline_average,
    baseline_borda,
    expected_divergences,
    gain_increments,
    infer,
    lb_bound,
    lb_divergence,
    load_dataset,
    load_model,
    lovasz_extension,
    ndcg_at_k,
    ranking_from_scores,
    save_model,
    serialize_model,
    synth_planted,
    train_linear,
    train_nested,
)

__all__ = [name for name in dir() if not name.startswith("_")]

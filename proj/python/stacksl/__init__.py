"""Budget-aware Stackelberg supervised learning simulator."""

from ._core import (
    Config,
    ConfigError,
    ContractViolation,
    GramState,
    calibrate_c,
    ce_loss,
    clip_loss,
    clip_study,
    config_keys,
    detail_csv,
    expand_grid,
    gate,
    gradient_check,
    kl_divergence,
    llf_threshold,
    loss_gradient,
    radius,
    run_episode,
    score,
    softmax,
    softmax_policy,
    sweep,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]

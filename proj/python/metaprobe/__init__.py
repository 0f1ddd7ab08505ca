"""Operator-masking probes for Java comparison operators."""

from __future__ import annotations

import json
from typing import Iterable, Sequence

from . import _core
from ._core import (
    BackendUnavailable,
    ConfigError,
    MetaprobeError,
    SpanMismatch,
    SyntaxError,
    TooFewPairs,
    entropy,
    mask,
    mirror,
    negate,
    window,
)

__all__ = [
    "BackendUnavailable",
    "ConfigError",
    "MetaprobeError",
    "SpanMismatch",
    "SyntaxError",
    "TooFewPairs",
    "baseline",
    "entropy",
    "mask",
    "mirror",
    "negate",
    "run_stage",
    "sites",
    "transform",
    "wilcoxon",
    "window",
]


def sites(code: str, kind: str = "block_swap", unit_id: str = "unit") -> list[dict]:
    """Transform sites of `kind` ("block_swap" or "operand_swap") in `code`."""
    return json.loads(_core.sites(code, kind, unit_id))


def transform(
    code: str,
    unit_id: str = "unit",
    kinds: Iterable[str] = ("block_swap", "operand_swap"),
    *,
    distractors: bool = True,
    rename: bool = False,
    refactor: bool = False,
    oracle_trials: int = 1000,
    seed: int = 0,
) -> dict:
    """Pairs for one function, each carrying its oracle verdict under "oracle"."""
    return json.loads(
        _core.transform(code, unit_id, list(kinds), distractors, rename, refactor, oracle_trials, seed)
    )


def wilcoxon(pairs: Sequence[tuple[float, float]]) -> dict:
    """One-sided signed-rank test that the second element exceeds the first."""
    return json.loads(_core.wilcoxon([(float(a), float(b)) for a, b in pairs]))


def baseline(truths: Sequence[str], prior: Sequence[float], runs: int = 1000, seed: int = 0) -> dict:
    """Monte-Carlo accuracy of guessing from `prior` (ordered == != < <= > >=)."""
    return json.loads(_core.baseline(list(truths), [float(p) for p in prior], runs, seed))


def run_stage(stage: str, config: dict) -> str:
    """Runs one pipeline stage with a config dict using the config-file keys.

    Returns the markdown for "report" and "" otherwise; outputs land in
    config["out_dir"].
    """
    return _core.run_stage(stage, json.dumps(config))

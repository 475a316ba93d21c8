"""Hand-built discrete models shipped with the engine."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from src.engine.discrete import WILDCARD, DiscreteModel
from src.errors import ConfigError
from src.model.types import Setting

# atom index 0 <-> -1, index 1 <-> +1
_COIN = [[-1], [1]]


def constant_model(value_a: int = 1, value_b: int = -1) -> DiscreteModel:
    return DiscreteModel(
        "constant",
        [[1.0]], [1.0], [1.0],
        {WILDCARD: [[value_a]]},
        {WILDCARD: [[value_b]]},
    )


def anticorrelated_coin() -> DiscreteModel:
    """lambda1 = +-1 equiprobable, lambda2 = -lambda1, A = lambda1, B = lambda2."""
    return DiscreteModel(
        "anticorrelated_coin",
        [[0.0, 0.5], [0.5, 0.0]], [1.0], [1.0],
        {WILDCARD: _COIN},
        {WILDCARD: _COIN},
    )


def independent_coins() -> DiscreteModel:
    return DiscreteModel(
        "independent_coins",
        [[0.25, 0.25], [0.25, 0.25]], [1.0], [1.0],
        {WILDCARD: _COIN},
        {WILDCARD: _COIN},
    )


def four_atom_correlated(p_same: float = 0.8) -> DiscreteModel:
    """p(+,+) = p(-,-) = p_same/2, p(+,-) = p(-,+) = (1 - p_same)/2."""
    if not 0.0 <= p_same <= 1.0:
        raise ConfigError(f"p_same must lie in [0, 1], got {p_same!r}")
    same, diff = p_same / 2.0, (1.0 - p_same) / 2.0
    return DiscreteModel(
        "four_atom",
        [[same, diff], [diff, same]], [1.0], [1.0],
        {WILDCARD: _COIN},
        {WILDCARD: _COIN},
    )


def strategy_mixture(
    labels_a: Sequence[str],
    labels_b: Sequence[str],
    strategies: Sequence[tuple[Sequence[int], Sequence[int]]],
    weights: Sequence[float] | None = None,
) -> DiscreteModel:
    """
    Convex mixture of deterministic local strategies. Strategy k assigns
    outcome strategies[k][0][i] to Alice's i-th label and strategies[k][1][j]
    to Bob's j-th label; the shared atom lambda1 = lambda2 = k selects it.
    """
    k = len(strategies)
    if k == 0:
        raise ConfigError("at least one strategy is required")
    weights = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
    source = np.diag(weights)
    table_a = {
        label: [[strategies[s][0][i]] for s in range(k)] for i, label in enumerate(labels_a)
    }
    table_b = {
        label: [[strategies[s][1][j]] for s in range(k)] for j, label in enumerate(labels_b)
    }
    return DiscreteModel("strategy_mixture", source, [1.0], [1.0], table_a, table_b)


def lookup_model(
    pairs: Sequence[tuple[Setting, Setting]],
    targets: Sequence[float],
    name: str = "lookup",
) -> DiscreteModel:
    """
    Reproduce any post-selected correlations on a finite grid of setting pairs.

    The source picks a grid point k uniformly together with signs (s, t)
    with P(s, t | k) = (1 + s t E_k) / 4. Alice clicks (with outcome s) only
    when her setting is the one of pair k, Bob likewise with t. After
    discarding 0 outcomes at pair m only atoms with k = m remain, so the
    post-selected correlation there is exactly E_m while each station's
    full-event marginals stay independent of the remote setting.
    """
    if len(pairs) != len(targets) or not pairs:
        raise ConfigError("lookup model needs one target per setting pair")
    keys = [(a.label, b.label) for a, b in pairs]
    if len(set(keys)) != len(keys):
        raise ConfigError("lookup model needs distinct setting pairs")
    for target in targets:
        if not -1.0 <= target <= 1.0 or math.isnan(target):
            raise ConfigError(f"target correlations must lie in [-1, 1], got {target!r}")

    k = len(pairs)
    source = np.zeros((2 * k, 2 * k))
    for idx, target in enumerate(targets):
        for s_idx, s in enumerate((-1, 1)):
            for t_idx, t in enumerate((-1, 1)):
                source[2 * idx + s_idx, 2 * idx + t_idx] = (1.0 + s * t * target) / (4.0 * k)

    signs = np.tile([-1, 1], k)
    table_a = {}
    for label in {a.label for a, _ in pairs}:
        active = np.repeat([a.label == label for a, _ in pairs], 2)
        table_a[label] = np.where(active, signs, 0)[:, None]
    table_b = {}
    for label in {b.label for _, b in pairs}:
        active = np.repeat([b.label == label for _, b in pairs], 2)
        table_b[label] = np.where(active, signs, 0)[:, None]
    return DiscreteModel(name, source, [1.0], [1.0], table_a, table_b)


def discretized_threshold_model(
    settings_a: Sequence[Setting],
    settings_b: Sequence[Setting],
    n_phi: int = 16,
    thresholds: Sequence[float] = (0.0, 0.5, 0.9),
    threshold_probs: Sequence[float] = (0.5, 0.3, 0.2),
) -> DiscreteModel:
    """
    Finite version of the threshold-detection model: phi on n_phi atoms
    (offset half a step so no atom sits on a tie), thresholds on a few
    atoms, outcome tables computed for the given settings.
    """
    phi = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    tau = np.asarray(thresholds, dtype=float)

    def table(setting: Setting, sign: int):
        c = np.cos(phi - setting.theta)[:, None]
        clicked = np.abs(c) >= tau[None, :]
        return np.where(clicked, sign * np.where(c >= 0.0, 1, -1), 0)

    source = np.diag(np.full(n_phi, 1.0 / n_phi))
    return DiscreteModel(
        "discretized_threshold",
        source, threshold_probs, threshold_probs,
        {s.label: table(s, 1) for s in settings_a},
        {s.label: table(s, -1) for s in settings_b},
    )

"""Log-linear ranking over candidate derivations, trained online.

Scores are dot products of sparse feature vectors with a weight map. After a
user picks a next state, the weights move along the gradient of the negative
log-probability of the state-consistent derivations, with per-coordinate
AdaGrad step sizes and L1 shrinkage toward zero.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .grammar import Category, GrammarRule

FeatureVector = Dict[str, float]

DEFAULT_STEP_SIZE = 0.1
DEFAULT_L1_PENALTY = 1e-4
ACCUMULATOR_FLOOR = 1e-8

_SENTINEL_LEFT = "<s>"
_SENTINEL_RIGHT = "</s>"


class Params:
    """Sparse weight vector plus the AdaGrad squared-gradient accumulator."""

    def __init__(
        self,
        weights: Optional[Dict[str, float]] = None,
        grad_sq: Optional[Dict[str, float]] = None,
        step_size: float = DEFAULT_STEP_SIZE,
        l1_penalty: float = DEFAULT_L1_PENALTY,
    ):
        self.weights: Dict[str, float] = dict(weights or {})
        self.grad_sq: Dict[str, float] = dict(grad_sq or {})
        self.step_size = step_size
        self.l1_penalty = l1_penalty

    def copy(self) -> "Params":
        return Params(self.weights, self.grad_sq, self.step_size, self.l1_penalty)

    def to_dict(self) -> dict:
        return {"weights": dict(sorted(self.weights.items())),
                "grad_sq": dict(sorted(self.grad_sq.items()))}

    @classmethod
    def from_dict(cls, data: dict, step_size: float = DEFAULT_STEP_SIZE,
                  l1_penalty: float = DEFAULT_L1_PENALTY) -> "Params":
        return cls(data.get("weights"), data.get("grad_sq"), step_size, l1_penalty)


def add_features(into: FeatureVector, feats: FeatureVector, scale: float = 1.0) -> None:
    for name, value in feats.items():
        into[name] = into.get(name, 0.0) + scale * value


def dot(weights: Dict[str, float], feats: FeatureVector) -> float:
    if len(feats) > len(weights):
        return sum(weights[k] * v for k, v in feats.items() if k in weights)
    return sum(feats[k] * w for k, w in weights.items() if k in feats)


def _bump(feats: FeatureVector, name: str) -> None:
    feats[name] = feats.get(name, 0.0) + 1.0


def local_features(
    rule: GrammarRule,
    category: Category,
    start: int,
    end: int,
    tokens: Sequence[str],
    user: str,
) -> FeatureVector:
    """Features contributed by one derivation node, excluding its children."""
    feats: FeatureVector = {}
    _bump(feats, f"rule.id={rule.id}")
    _bump(feats, "rule.core" if rule.is_core else "rule.induced")
    if rule.use_count > 0:
        _bump(feats, "rule.seen_before")
    if rule.used_by_other:
        _bump(feats, "rule.used_by_other")
    if not rule.is_core:
        if rule.author == user:
            _bump(feats, "rule.own")
            _bump(feats, "social.self")
        _bump(feats, f"social.author={rule.author}")
        _bump(feats, f"social.pair={rule.author}|{user}")
    if rule.scope_kind is not None:
        kind = rule.scope_kind.value
        _bump(feats, f"scope={kind}")
        _bump(feats, f"scope={kind}|{user}")

    cat = category.value
    first = tokens[start] if start < len(tokens) else _SENTINEL_RIGHT
    last = tokens[end - 1] if 0 <= end - 1 < len(tokens) else _SENTINEL_RIGHT
    left1 = tokens[start - 1] if start - 1 >= 0 else _SENTINEL_LEFT
    left2 = tokens[start - 2] if start - 2 >= 0 else _SENTINEL_LEFT
    right1 = tokens[end] if end < len(tokens) else _SENTINEL_RIGHT
    right2 = tokens[end + 1] if end + 1 < len(tokens) else _SENTINEL_RIGHT
    _bump(feats, f"span.first={cat}|{first}")
    _bump(feats, f"span.last={cat}|{last}")
    _bump(feats, f"span.left={cat}|{left1}")
    _bump(feats, f"span.left2={cat}|{left2},{left1}")
    _bump(feats, f"span.right={cat}|{right1}")
    _bump(feats, f"span.right2={cat}|{right1},{right2}")
    return feats


def featurize(derivation, tokens: Sequence[str], user: str) -> FeatureVector:
    """Full feature vector of a derivation tree: the sum of its node locals."""
    feats: FeatureVector = {}

    def walk(node):
        add_features(feats, local_features(
            node.rule, node.category, node.start, node.end, tokens, user))
        for child in node.children:
            walk(child)

    walk(derivation)
    return feats


def log_softmax(scores: Sequence[float]) -> List[float]:
    peak = max(scores)
    exps = [math.exp(s - peak) for s in scores]
    log_z = peak + math.log(sum(exps))
    return [s - log_z for s in scores]


def distribution(scores: Sequence[float]) -> List[float]:
    return [math.exp(v) for v in log_softmax(scores)]


def loss_and_gradient(
    feature_vectors: Sequence[FeatureVector],
    weights: Dict[str, float],
    consistent: Set[int],
) -> Tuple[float, FeatureVector]:
    """Negative log-probability that a derivation consistent with the chosen
    state is drawn from the model, and its gradient in the weights.

    The gradient is the model expectation of the features minus the
    expectation restricted to the consistent set. The L1 penalty is handled
    separately by shrinkage, not here.
    """
    if not consistent:
        raise ValueError("no consistent derivation")
    scores = [dot(weights, fv) for fv in feature_vectors]
    log_probs = log_softmax(scores)
    probs = [math.exp(v) for v in log_probs]
    consistent_mass = sum(probs[i] for i in consistent)
    loss = -math.log(consistent_mass) if consistent_mass > 0 else math.inf

    gradient: FeatureVector = {}
    for i, fv in enumerate(feature_vectors):
        add_features(gradient, fv, probs[i])
    for i in consistent:
        add_features(gradient, feature_vectors[i], -probs[i] / consistent_mass)
    return loss, gradient


class ImpossibleChoice(Exception):
    """The chosen next state is produced by none of the candidate programs."""


def update(
    params: Params,
    feature_vectors: Sequence[FeatureVector],
    consistent: Set[int],
) -> Params:
    """One AdaGrad step on the choice loss, then L1 truncation toward zero.

    Returns new Params; the input is left untouched. Weights that truncate to
    exactly zero are dropped from the map to keep it sparse.
    """
    if not consistent:
        raise ImpossibleChoice("no candidate produces the chosen state")
    new = params.copy()
    if new.step_size == 0:
        return new
    _, gradient = loss_and_gradient(feature_vectors, new.weights, consistent)

    for name, g in gradient.items():
        if g == 0.0:
            continue
        new.grad_sq[name] = new.grad_sq.get(name, 0.0) + g * g
        rate = new.step_size / math.sqrt(max(new.grad_sq[name], ACCUMULATOR_FLOOR))
        new.weights[name] = new.weights.get(name, 0.0) - rate * g

    # Shrink every live weight by its own per-coordinate amount.
    for name in list(new.weights):
        rate = new.step_size / math.sqrt(max(new.grad_sq.get(name, 0.0), ACCUMULATOR_FLOOR))
        w = new.weights[name]
        shrunk = math.copysign(max(0.0, abs(w) - new.l1_penalty * rate), w)
        if shrunk == 0.0:
            del new.weights[name]
        else:
            new.weights[name] = shrunk
    return new

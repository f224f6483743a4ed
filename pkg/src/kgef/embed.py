"""Knowledge-graph embedding training from first principles.

Four scoring models over integer-indexed triples (numpy only):

    TransE    s = -||h + r - t||2
    TransR    s = -||M_r h + r - M_r t||2
    DistMult  s = sum_i h_i r_i t_i
    RESCAL    s = h^T M_r t

Scores are uniformly oriented higher-is-better. Translation models
train with margin-ranking loss and unit-norm entity projection;
bilinear models with logistic loss plus L2 regularization. Negative
sampling is filtered uniform corruption of head or tail.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

MODELS = ("TransE", "TransR", "DistMult", "RESCAL")
TRANSLATION_MODELS = ("TransE", "TransR")


class TrainingError(Exception):
    """Non-finite value produced during training."""


@dataclass
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    margin: float = 1.0
    negatives_per_positive: int = 1
    batch_size: int = 32
    seed: int = 0
    reg_lambda: float = 1e-4
    dim: int = 64

    def __post_init__(self):
        for name in ("learning_rate", "margin", "negatives_per_positive",
                     "batch_size", "reg_lambda", "dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass
class ModelParams:
    model: str
    dim: int
    entity_vecs: np.ndarray  # |E| x d
    relation_vecs: np.ndarray  # |R| x d
    relation_mats: np.ndarray | None = None  # |R| x d x d for TransR/RESCAL

    def copy(self) -> "ModelParams":
        return replace(
            self,
            entity_vecs=self.entity_vecs.copy(),
            relation_vecs=self.relation_vecs.copy(),
            relation_mats=None if self.relation_mats is None else self.relation_mats.copy(),
        )

    def check_finite(self, where: str = "") -> None:
        arrays = [self.entity_vecs, self.relation_vecs]
        if self.relation_mats is not None:
            arrays.append(self.relation_mats)
        if not all(np.isfinite(a).all() for a in arrays):
            raise TrainingError(f"non-finite parameter value {where}")


def _xavier(rng, shape):
    # fan over the embedding dimension, not the vocabulary size
    fan_in, fan_out = shape[-2] if len(shape) > 2 else shape[-1], shape[-1]
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_params(model: str, n_entities: int, n_relations: int, dim: int,
                rng: np.random.Generator) -> ModelParams:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    ent = _xavier(rng, (n_entities, dim))
    rel = _xavier(rng, (n_relations, dim))
    mats = None
    if model == "TransR":
        # identity projection start keeps early training close to TransE
        mats = np.tile(np.eye(dim), (n_relations, 1, 1))
    elif model == "RESCAL":
        mats = _xavier(rng, (n_relations, dim, dim))
    if model in TRANSLATION_MODELS:
        ent /= np.linalg.norm(ent, axis=1, keepdims=True)
    return ModelParams(model, dim, ent, rel, mats)


def score(params: ModelParams, h: int, r: int, t: int) -> float:
    """Scalar plausibility of (h, r, t); higher is better."""
    hv, rv, tv = params.entity_vecs[h], params.relation_vecs[r], params.entity_vecs[t]
    if params.model == "TransE":
        return float(-np.linalg.norm(hv + rv - tv))
    if params.model == "TransR":
        m = params.relation_mats[r]
        return float(-np.linalg.norm(m @ hv + rv - m @ tv))
    if params.model == "DistMult":
        return float(np.sum(hv * rv * tv))
    if params.model == "RESCAL":
        return float(hv @ params.relation_mats[r] @ tv)
    raise ValueError(params.model)


def score_all_tails(params: ModelParams, h: int, r: int) -> np.ndarray:
    """Scores of (h, r, t) for every entity t, vectorized."""
    ent = params.entity_vecs
    hv, rv = ent[h], params.relation_vecs[r]
    if params.model == "TransE":
        return -np.linalg.norm((hv + rv)[None, :] - ent, axis=1)
    if params.model == "TransR":
        m = params.relation_mats[r]
        return -np.linalg.norm((m @ hv + rv)[None, :] - ent @ m.T, axis=1)
    if params.model == "DistMult":
        return ent @ (hv * rv)
    if params.model == "RESCAL":
        return ent @ (params.relation_mats[r].T @ hv)
    raise ValueError(params.model)


def negative_sample(triple, n_entities: int, positives: set,
                    rng: np.random.Generator, max_tries: int = 50):
    """Corrupt head or tail uniformly, rejecting known positives.

    Returns the corrupted triple, or None if no valid corruption was
    found within max_tries draws (the positive is then skipped).
    """
    h, r, t = triple
    for _ in range(max_tries):
        corrupt_head = bool(rng.integers(2))
        e = int(rng.integers(n_entities))
        cand = (e, r, t) if corrupt_head else (h, r, e)
        if cand != (h, r, t) and cand not in positives:
            return cand
    return None


# ---------------------------------------------------------------------------
# per-sample loss and analytic gradients (shared by training and grad check)

def sample_loss(params: ModelParams, pos, neg, margin: float, reg_lambda: float) -> float:
    """Loss contribution of one (positive, negative) pair."""
    s_pos = score(params, *pos)
    s_neg = score(params, *neg)
    if params.model in TRANSLATION_MODELS:
        return max(0.0, margin - s_pos + s_neg)
    reg = 0.0
    for (h, r, t) in (pos, neg):
        reg += np.sum(params.entity_vecs[h] ** 2) + np.sum(params.entity_vecs[t] ** 2)
        reg += np.sum(params.relation_vecs[r] ** 2)
        if params.relation_mats is not None:
            reg += np.sum(params.relation_mats[r] ** 2)
    return (float(np.logaddexp(0.0, -s_pos) + np.logaddexp(0.0, s_neg))
            + reg_lambda * float(reg))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def _unit(v):
    n = np.linalg.norm(v)
    return (v / n, n) if n > 0 else (np.zeros_like(v), 0.0)


def sample_grads(params: ModelParams, pos, neg, margin: float, reg_lambda: float) -> dict:
    """Analytic gradients of sample_loss.

    Keys: ("entity", i), ("relation", r), ("matrix", r); values are
    accumulated gradient arrays. TransE/TransR use the hinge
    subgradient (zero when inactive).
    """
    grads: dict = {}

    def acc(key, g):
        if key in grads:
            grads[key] = grads[key] + g
        else:
            grads[key] = np.array(g, dtype=float)

    ent, rel, mats = params.entity_vecs, params.relation_vecs, params.relation_mats
    model = params.model

    if model in TRANSLATION_MODELS:
        if sample_loss(params, pos, neg, margin, reg_lambda) <= 0.0:
            return grads
        # L = margin + ||d_pos|| - ||d_neg||
        for (h, r, t), sign in ((pos, 1.0), (neg, -1.0)):
            if model == "TransE":
                u, n = _unit(ent[h] + rel[r] - ent[t])
                acc(("entity", h), sign * u)
                acc(("entity", t), -sign * u)
                acc(("relation", r), sign * u)
            else:
                m = mats[r]
                u, n = _unit(m @ ent[h] + rel[r] - m @ ent[t])
                acc(("entity", h), sign * (m.T @ u))
                acc(("entity", t), -sign * (m.T @ u))
                acc(("relation", r), sign * u)
                acc(("matrix", r), sign * np.outer(u, ent[h] - ent[t]))
        return grads

    # bilinear models: logistic loss, labels +1 (pos) and -1 (neg)
    for (h, r, t), y in ((pos, 1.0), (neg, -1.0)):
        s = score(params, h, r, t)
        g = -y * _sigmoid(-y * s)  # d softplus(-ys) / ds
        if model == "DistMult":
            acc(("entity", h), g * rel[r] * ent[t])
            acc(("entity", t), g * ent[h] * rel[r])
            acc(("relation", r), g * ent[h] * ent[t])
        else:  # RESCAL
            m = mats[r]
            acc(("entity", h), g * (m @ ent[t]))
            acc(("entity", t), g * (m.T @ ent[h]))
            acc(("matrix", r), g * np.outer(ent[h], ent[t]))
        acc(("entity", h), 2.0 * reg_lambda * ent[h])
        acc(("entity", t), 2.0 * reg_lambda * ent[t])
        acc(("relation", r), 2.0 * reg_lambda * rel[r])
        if model == "RESCAL":
            acc(("matrix", r), 2.0 * reg_lambda * mats[r])
    return grads


def gradient_check(params: ModelParams, pos, neg, margin: float = 1.0,
                   reg_lambda: float = 1e-4, eps: float = 1e-5) -> float:
    """Max relative error between analytic and central finite-difference
    gradients over every parameter touched by the pair."""
    analytic = sample_grads(params, pos, neg, margin, reg_lambda)
    max_err = 0.0
    arrays = {"entity": params.entity_vecs, "relation": params.relation_vecs,
              "matrix": params.relation_mats}
    touched = set()
    for (h, r, t) in (pos, neg):
        touched.add(("entity", h))
        touched.add(("entity", t))
        touched.add(("relation", r))
        if params.relation_mats is not None:
            touched.add(("matrix", r))
    for kind, idx in sorted(touched):
        arr = arrays[kind]
        a = analytic.get((kind, idx), np.zeros_like(arr[idx]))
        flat_view = arr[idx].reshape(-1)
        a_flat = np.asarray(a).reshape(-1)
        for j in range(flat_view.size):
            orig = flat_view[j]
            flat_view[j] = orig + eps
            up = sample_loss(params, pos, neg, margin, reg_lambda)
            flat_view[j] = orig - eps
            down = sample_loss(params, pos, neg, margin, reg_lambda)
            flat_view[j] = orig
            num = (up - down) / (2.0 * eps)
            err = abs(num - a_flat[j]) / max(1.0, abs(num), abs(a_flat[j]))
            max_err = max(max_err, err)
    return max_err


# ---------------------------------------------------------------------------
# training

def _apply_batch(params: ModelParams, pairs, lr: float, margin: float,
                 reg_lambda: float) -> float:
    """SGD step over a list of (pos, neg) pairs; returns summed loss."""
    total = 0.0
    updates: dict = {}
    for pos, neg in pairs:
        total += sample_loss(params, pos, neg, margin, reg_lambda)
        for key, g in sample_grads(params, pos, neg, margin, reg_lambda).items():
            if key in updates:
                updates[key] = updates[key] + g
            else:
                updates[key] = g
    for (kind, idx), g in updates.items():
        if kind == "entity":
            params.entity_vecs[idx] -= lr * g
        elif kind == "relation":
            params.relation_vecs[idx] -= lr * g
        else:
            params.relation_mats[idx] -= lr * g
    if params.model in TRANSLATION_MODELS:
        norms = np.linalg.norm(params.entity_vecs, axis=1, keepdims=True)
        np.maximum(norms, 1e-12, out=norms)
        params.entity_vecs /= norms
    return total


def train(triples, n_entities: int, n_relations: int, model: str,
          config: TrainConfig):
    """Mini-batch SGD over the triple list; returns (params, epoch losses).

    Fully determined by (triples, config.seed): the same seed yields
    bit-identical parameters.
    """
    if not triples:
        raise ValueError("graph is empty")
    rng = np.random.default_rng(config.seed)
    params = init_params(model, n_entities, n_relations, config.dim, rng)
    positives = set(map(tuple, triples))
    triples = sorted(positives)

    # the logged loss is evaluated on a frozen (positive, negative) set so
    # epochs are comparable; the SGD negatives are resampled every step
    eval_rng = np.random.default_rng(config.seed + 1)
    eval_pairs = []
    for pos in triples:
        neg = negative_sample(pos, n_entities, positives, eval_rng)
        if neg is not None:
            eval_pairs.append((pos, neg))

    def logged_loss():
        return float(np.mean([
            sample_loss(params, pos, neg, config.margin, config.reg_lambda)
            for pos, neg in eval_pairs])) if eval_pairs else 0.0

    losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(triples))
        for start in range(0, len(order), config.batch_size):
            batch_idx = order[start:start + config.batch_size]
            pairs = []
            for i in batch_idx:
                pos = triples[i]
                for _ in range(config.negatives_per_positive):
                    neg = negative_sample(pos, n_entities, positives, rng)
                    if neg is not None:
                        pairs.append((pos, neg))
            if not pairs:
                continue
            batch_loss = _apply_batch(params, pairs, config.learning_rate,
                                      config.margin, config.reg_lambda)
            if not np.isfinite(batch_loss):
                raise TrainingError(
                    f"NaN loss at epoch {epoch}, batch {start // config.batch_size}")
        params.check_finite(f"after epoch {epoch}")
        losses.append(logged_loss())
    return params, losses


# ---------------------------------------------------------------------------
# link-prediction evaluation

def evaluate_link_prediction(params: ModelParams, test_triples, all_triples,
                             hits_at=(1, 3, 10)) -> dict:
    """Filtered tail ranking: other known true tails are excluded from
    each candidate list before computing the true tail's rank."""
    known_tails: dict = {}
    for h, r, t in all_triples:
        known_tails.setdefault((h, r), set()).add(t)
    rr = []
    hits = {k: 0 for k in hits_at}
    for h, r, t in test_triples:
        scores = score_all_tails(params, h, r).copy()
        for other in known_tails.get((h, r), ()):
            if other != t:
                scores[other] = -np.inf
        s_t = scores[t]
        better = int(np.sum(scores > s_t))
        ties = int(np.sum(scores == s_t)) - 1
        rank = better + 1 + ties / 2.0
        rr.append(1.0 / rank)
        for k in hits_at:
            if rank <= k:
                hits[k] += 1
    n = len(test_triples)
    out = {"MRR": float(np.mean(rr)) if rr else 0.0}
    for k in hits_at:
        out[f"Hits@{k}"] = hits[k] / n if n else 0.0
    return out


def uniform_mrr(candidate_counts) -> float:
    """Expected MRR when the true tail's rank is uniform over n candidates."""
    values = []
    for n in candidate_counts:
        harmonic = np.sum(1.0 / np.arange(1, n + 1))
        values.append(harmonic / n)
    return float(np.mean(values))


# ---------------------------------------------------------------------------
# graph adapter and persistence

def graph_to_triples(graph, relation_whitelist=None, provenance=None):
    """Index a kgstore graph for embedding training.

    Literal objects become nodes so status/year/gender signals reach
    the models; free-text blurbs are excluded by default. Returns
    (triples, entity_labels, relation_labels) with deterministic
    label ordering.

    provenance restricts the triple set to one source's portion.
    """
    if relation_whitelist is None:
        relation_whitelist = sorted(set(t.predicate for t in graph.triples) - {"hasBlurb"})
    whitelist = set(relation_whitelist)
    raw = []
    labels = set()
    rels = set()
    for t in graph.triples:
        if t.predicate not in whitelist:
            continue
        if provenance is not None and t.provenance != provenance:
            continue
        obj = f"literal:{t.predicate}:{t.obj}" if t.obj_is_literal else t.obj
        raw.append((t.subject, t.predicate, obj))
        labels.add(t.subject)
        labels.add(obj)
        rels.add(t.predicate)
    entity_labels = sorted(labels)
    relation_labels = sorted(rels)
    e_idx = {label: i for i, label in enumerate(entity_labels)}
    r_idx = {label: i for i, label in enumerate(relation_labels)}
    triples = sorted((e_idx[s], r_idx[p], e_idx[o]) for s, p, o in raw)
    return triples, entity_labels, relation_labels


def save_params(path, params: ModelParams, seed: int) -> None:
    """npz with header fields (model, d, |E|, |R|, seed) and matrices."""
    arrays = {
        "model": np.array(params.model),
        "dim": np.array(params.dim),
        "n_entities": np.array(params.entity_vecs.shape[0]),
        "n_relations": np.array(params.relation_vecs.shape[0]),
        "seed": np.array(seed),
        "entity_vecs": params.entity_vecs,
        "relation_vecs": params.relation_vecs,
    }
    if params.relation_mats is not None:
        arrays["relation_mats"] = params.relation_mats
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_params(path) -> ModelParams:
    with np.load(path, allow_pickle=False) as data:
        return ModelParams(
            model=str(data["model"]),
            dim=int(data["dim"]),
            entity_vecs=data["entity_vecs"],
            relation_vecs=data["relation_vecs"],
            relation_mats=data["relation_mats"] if "relation_mats" in data else None,
        )


def toy_graph():
    """Bundled 20-entity / 40-triple sanity graph.

    Sixteen leaves split across four hubs (entities 16-19). Relation 0
    is hub membership; relation 1 is a symmetric peer relation between
    leaves sharing a hub, stored in both directions. The redundancy
    makes a held-out peer edge inferable from the rest (its reverse
    stays in training). Returns (triples, n_entities, n_relations,
    held_out) with held_out a 5-triple evaluation split disjoint from
    the remaining 35 training triples.
    """
    triples = []
    for leaf in range(16):
        triples.append((leaf, 0, 16 + leaf % 4))
    for hub in range(4):
        chain = (hub, hub + 4, hub + 8, hub + 12)
        for a, b in zip(chain, chain[1:]):
            triples.append((a, 1, b))
            triples.append((b, 1, a))
    held_out = [(4, 1, 0), (9, 1, 5), (14, 1, 10), (7, 1, 3), (12, 1, 8)]
    train_split = [t for t in triples if t not in held_out]
    assert len(triples) == 40 and len(train_split) == 35
    return triples, 20, 2, held_out

"""Exposure analysis over trained embeddings.

For a sample of Western target authors, rank all other authors by
cosine similarity of their entity vectors, then measure how many
Transnational authors land in the top 1/5/10 percent of each list and
which continents the nearest Transnational neighbors come from.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .classify import TRANSNATIONAL, WESTERN

DEFAULT_K_LEVELS = (0.01, 0.05, 0.10)


@dataclass
class ExposureReport:
    portion_label: str
    model: str
    sample_size: int
    ratios: dict  # k fraction -> (percent Transnational, absolute count, pool size)
    per_target: list = field(default_factory=list)  # (target, ranked neighbor ids)
    warnings: list = field(default_factory=list)


def cosine_similarities(vecs: np.ndarray, target_vec: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vecs, axis=1)
    t_norm = np.linalg.norm(target_vec)
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = (vecs @ target_vec) / (norms * t_norm)
    sims[norms == 0] = np.nan  # zero-norm candidates excluded by callers
    return sims


def similar_authors(entity_vecs: np.ndarray, index: dict, target, candidates,
                    warnings: list | None = None) -> list:
    """Candidates sorted by descending cosine similarity to the target.

    Ties break by ascending id. Zero-norm candidate vectors are
    excluded with a warning.
    """
    if target in candidates:
        raise ValueError("target must not appear among candidates")
    cand = sorted(candidates)
    vecs = entity_vecs[[index[c] for c in cand]]
    sims = cosine_similarities(vecs, entity_vecs[index[target]])
    out = []
    for cid, sim in zip(cand, sims):
        if math.isnan(sim):
            if warnings is not None:
                warnings.append(f"zero-norm vector for {cid!r}, excluded")
            continue
        out.append((cid, float(sim)))
    out.sort(key=lambda pair: (-pair[1], pair[0]))
    return out


def top_k_pool(ranked: list, k: float) -> list:
    """Top ceil(k * len) of a ranked list; ceiling keeps small lists non-empty."""
    n = math.ceil(k * len(ranked))
    return ranked[:n]


def exposure_ratios(entity_vecs, index, assignments: dict, sample,
                    model: str = "", portion_label: str = "",
                    k_levels=DEFAULT_K_LEVELS, keep_per_target: bool = False,
                    candidates=None) -> ExposureReport:
    """Pooled top-k% Transnational ratios over a sample of Western targets.

    assignments: author id -> status. Candidates default to every
    assigned author other than the target; per-target top-k membership
    counts are pooled across the sample.
    """
    population = sorted(candidates) if candidates is not None else sorted(assignments)
    western = [a for a in population if assignments.get(a) == WESTERN]
    if len(sample) > len(western):
        raise ValueError(
            f"sample of {len(sample)} exceeds Western population of {len(western)}")
    warnings: list = []
    trans_counts = {k: 0 for k in k_levels}
    pool_sizes = {k: 0 for k in k_levels}
    per_target = []
    for target in sample:
        cands = [c for c in population if c != target]
        ranked = similar_authors(entity_vecs, index, target, cands, warnings)
        if keep_per_target:
            per_target.append((target, [cid for cid, _ in ranked]))
        for k in k_levels:
            pool = top_k_pool(ranked, k)
            pool_sizes[k] += len(pool)
            trans_counts[k] += sum(
                1 for cid, _ in pool if assignments.get(cid) == TRANSNATIONAL)
    ratios = {}
    for k in k_levels:
        pct = 100.0 * trans_counts[k] / pool_sizes[k] if pool_sizes[k] else 0.0
        ratios[k] = (pct, trans_counts[k], pool_sizes[k])
    return ExposureReport(
        portion_label=portion_label,
        model=model,
        sample_size=len(sample),
        ratios=ratios,
        per_target=per_target,
        warnings=warnings,
    )


def continent_flows(entity_vecs, index, assignments: dict, sample,
                    country_of: dict, continent_map: dict) -> Counter:
    """Continent pairs (target's, nearest Transnational neighbor's).

    country_of: author id -> country code. Authors without usable
    continent data land in the "unknown" row; counts over the sample
    therefore sum to len(sample).
    """
    population = sorted(assignments)
    trans = [a for a in population if assignments.get(a) == TRANSNATIONAL]
    flows: Counter = Counter()

    def continent(author_id):
        country = country_of.get(author_id)
        return continent_map.get(country, "unknown") if country else "unknown"

    for target in sample:
        cands = [c for c in trans if c != target]
        ranked = similar_authors(entity_vecs, index, target, cands)
        if not ranked:
            flows[(continent(target), "unknown")] += 1
            continue
        nearest = ranked[0][0]
        flows[(continent(target), continent(nearest))] += 1
    return flows


def write_exposure_report(path, reports: list, k_levels=DEFAULT_K_LEVELS) -> None:
    """CSV shaped like the exposure table: one row per (model, portion),
    one `percent (count)` cell per k level."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["model", "portion", "sample_size"]
        header += [f"top_{k * 100:g}pct" for k in k_levels]
        writer.writerow(header)
        for rep in sorted(reports, key=lambda r: (r.model, r.portion_label)):
            row = [rep.model, rep.portion_label, rep.sample_size]
            for k in k_levels:
                pct, count, _ = rep.ratios[k]
                row.append(f"{pct:.1f}% ({count})")
            writer.writerow(row)


def write_flows(path, flows: Counter) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["western_continent", "transnational_continent", "count"])
        for (west, trans), count in sorted(flows.items()):
            writer.writerow([west, trans, count])

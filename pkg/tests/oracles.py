"""Brute-force reference implementations used to verify the package.

Everything here is written independently of the package internals: plain
Python loops, `math`, and exhaustive enumeration. Tests compare package
outputs against these.
"""

from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence


def oracle_representativeness(
    word: str,
    member_token_lists: Sequence[Sequence[str]],
    all_token_lists: Sequence[Sequence[str]],
) -> float:
    size = len(member_token_lists)
    s = sum(1 for toks in member_token_lists if word in toks)
    if s == 0:
        return 0.0
    t = sum(sum(1 for tok in toks if tok == word) for toks in member_token_lists)
    df = sum(1 for toks in all_token_lists if word in toks)
    return (s / size) * math.tanh(t / size) * math.log(len(all_token_lists) / df)


def oracle_generic_penalty(ranks: Mapping[str, int], cluster_id: str) -> float:
    vals = sorted(ranks.values())
    n = len(vals)
    if n % 2 == 1:
        med = vals[n // 2]
    else:
        med = (vals[n // 2 - 1] + vals[n // 2]) / 2
    return math.log(med / (1 + ranks[cluster_id]))


def oracle_coherence(vectors: Sequence[Sequence[float]]) -> float:
    n = len(vectors)
    dim = len(vectors[0])
    mean = [sum(v[d] for v in vectors) / n for d in range(dim)]
    mean_norm = math.sqrt(sum(x * x for x in mean))
    total = 0.0
    for v in vectors:
        dot = sum(a * b for a, b in zip(v, mean))
        v_norm = math.sqrt(sum(a * a for a in v))
        total += dot / (v_norm * mean_norm)
    return total / n


def oracle_features(
    word_vec: Sequence[float], rep_vecs: Sequence[Sequence[float]]
) -> tuple[float, float, float, float]:
    def euclid(a, b):
        return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))

    def cos(a, b):
        dot = sum(x * y for x, y in zip(a, b))
        na = math.sqrt(sum(x * x for x in a))
        nb = math.sqrt(sum(y * y for y in b))
        return dot / (na * nb)

    dists = [euclid(word_vec, r) for r in rep_vecs]
    coss = [cos(word_vec, r) for r in rep_vecs]
    n = len(rep_vecs)
    mean_d = sum(dists) / n
    var_d = sum((d - mean_d) ** 2 for d in dists) / n
    mean_c = sum(coss) / n
    var_c = sum((c - mean_c) ** 2 for c in coss) / n
    return (mean_d, var_d, mean_c, var_c)


def oracle_matching(counts: Sequence[Sequence[int]]) -> tuple[int, list[int | None]]:
    """Exhaustive maximum-weight complete matching with canonical tie-break.

    Returns (best weight, assignment vector): one column index or None per
    row, exactly min(R, C) rows matched. Among optimal assignments the
    lexicographically smallest vector wins, None sorting after any column.
    """
    n_rows = len(counts)
    n_cols = len(counts[0])
    size = min(n_rows, n_cols)

    def lex_key(vec: Sequence[int | None]):
        return [(1,) if j is None else (0, j) for j in vec]

    best_weight: int | None = None
    best_vec: list[int | None] | None = None
    for rows in itertools.combinations(range(n_rows), size):
        for cols in itertools.permutations(range(n_cols), size):
            weight = sum(counts[i][j] for i, j in zip(rows, cols))
            vec: list[int | None] = [None] * n_rows
            for i, j in zip(rows, cols):
                vec[i] = j
            if (
                best_weight is None
                or weight > best_weight
                or (weight == best_weight and lex_key(vec) < lex_key(best_vec))
            ):
                best_weight = weight
                best_vec = vec
    assert best_vec is not None
    return int(best_weight), best_vec


def oracle_cluster_mapping(
    counts: Sequence[Sequence[int]],
    cluster_ids: Sequence[str],
    class_ids: Sequence[str],
) -> dict[str, str]:
    """Full cluster -> class map: matching plus majority fallback."""
    _, vec = oracle_matching(counts)
    out: dict[str, str] = {}
    for i, j in enumerate(vec):
        if j is not None:
            out[cluster_ids[i]] = class_ids[j]
        else:
            row = counts[i]
            best = max(range(len(row)), key=lambda jj: (row[jj], -jj))
            # max() above prefers the larger count and, among equals, the
            # smaller column index.
            out[cluster_ids[i]] = class_ids[best]
    return out

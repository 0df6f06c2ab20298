"""Exhaustive alignment oracle, written independently of the greedy scorer."""

from functools import lru_cache

RANK = {"exact": 0, "t2": 1, "t1": 2}


def relation(p, g):
    """Tier relation between two codes given as (tier1, tier2, tier3) tuples."""
    if p == g:
        return "exact"
    if p[0] != g[0]:
        return None
    if p[1] is not None and p[1] == g[1]:
        return "t2"
    return "t1"


def best_alignment(pred, gold):
    """Return (exact, t2, t1) maximised lexicographically over all matchings."""
    pred, gold = tuple(pred), tuple(gold)

    @lru_cache(maxsize=None)
    def best(i, used):
        if i == len(pred):
            return (0, 0, 0)
        result = best(i + 1, used)  # leave pred[i] unmatched
        for j, g in enumerate(gold):
            if used >> j & 1:
                continue
            rel = relation(pred[i], g)
            if rel is None:
                continue
            rest = best(i + 1, used | 1 << j)
            gain = [0, 0, 0]
            gain[RANK[rel]] = 1
            cand = tuple(a + b for a, b in zip(rest, gain))
            if cand > result:
                result = cand
        return result

    return best(0, 0)

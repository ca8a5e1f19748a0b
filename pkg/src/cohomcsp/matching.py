"""Bipartite maximum matching by augmenting paths (deterministic vertex order)."""

from __future__ import annotations

from typing import Sequence


def maximum_matching(n_left: int, n_right: int,
                     adj: Sequence[Sequence[int]]) -> list[int]:
    """Return match_left where match_left[u] is u's partner on the right or -1.

    ``adj[u]`` lists the right-vertices reachable from left-vertex u.  Vertices
    are tried in increasing index order, so the result is deterministic.
    """
    match_left = [-1] * n_left
    match_right = [-1] * n_right

    def augment(u: int, seen: list[bool]) -> bool:
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or augment(match_right[v], seen):
                    match_left[u] = v
                    match_right[v] = u
                    return True
        return False

    for u in range(n_left):
        if match_left[u] == -1:
            augment(u, [False] * n_right)
    return match_left


def has_perfect_matching(n: int, adj: Sequence[Sequence[int]]) -> bool:
    """True iff the bipartite graph on n + n vertices has a perfect matching."""
    match_left = maximum_matching(n, n, adj)
    return all(v != -1 for v in match_left)

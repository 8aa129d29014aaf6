"""Maximum bipartite matching (Hopcroft-Karp) with Hall-violator extraction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

INF = 1 << 60


@dataclass
class Matching:
    left_to_right: list[int]  # -1 when unmatched
    right_to_left: dict[int, int]

    @property
    def size(self) -> int:
        return sum(1 for x in self.left_to_right if x >= 0)

    def saturates_left(self) -> bool:
        return all(x >= 0 for x in self.left_to_right)


def hopcroft_karp(adj: list[list[int]]) -> Matching:
    """Maximum matching for a bipartite graph given as left -> list of right ids.

    Right ids may be arbitrary hashable integers. Neighbor lists are scanned in
    the given order, so the result is deterministic.
    """
    nl = len(adj)
    match_l = [-1] * nl
    match_r: dict[int, int] = {}
    dist = [0] * nl

    def bfs() -> bool:
        q = deque()
        for u in range(nl):
            if match_l[u] < 0:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r.get(v, -1)
                if w < 0:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative layered DFS; stack holds (left vertex, next neighbor index)
        stack = [[root, 0]]
        path: list[tuple[int, int]] = []
        while stack:
            top = stack[-1]
            u, i = top
            if i >= len(adj[u]):
                dist[u] = INF
                stack.pop()
                if path:
                    path.pop()
                continue
            top[1] += 1
            v = adj[u][i]
            w = match_r.get(v, -1)
            if w < 0:
                path.append((u, v))
                for a, b in path:
                    match_l[a] = b
                    match_r[b] = a
                return True
            if dist[w] == dist[u] + 1:
                path.append((u, v))
                stack.append([w, 0])
        return False

    while bfs():
        for u in range(nl):
            if match_l[u] < 0:
                dfs(u)
    return Matching(match_l, match_r)


def hall_violator(adj: list[list[int]], matching: Matching) -> tuple[list[int], list[int]] | None:
    """A left set whose neighborhood is smaller than itself, or None if saturated.

    Starting from an unmatched left vertex, everything reachable by alternating
    paths forms the witness; its neighborhood is fully matched back into it,
    so |N(witness)| = |witness| - 1.
    """
    match_l, match_r = matching.left_to_right, matching.right_to_left
    free = [u for u in range(len(adj)) if match_l[u] < 0]
    if not free:
        return None
    root = free[0]
    left_seen = {root}
    right_seen: set[int] = set()
    q = deque([root])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v in right_seen:
                continue
            right_seen.add(v)
            w = match_r.get(v, -1)
            if w >= 0 and w not in left_seen:
                left_seen.add(w)
                q.append(w)
    return sorted(left_seen), sorted(right_seen)

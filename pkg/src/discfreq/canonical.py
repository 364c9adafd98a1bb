"""Exact canonical labelling of small rooted graphs.

The search is the classic individualize-and-refine scheme: refine an
isomorphism-invariant colouring to an equitable one, branch on every vertex of
the first non-singleton cell, and keep the lexicographically smallest
adjacency encoding among the discrete leaves.  Two reductions keep the tree
small without affecting exactness:

* twins (vertices whose neighbourhoods agree apart from each other) in the
  branching cell produce identical subtrees, so only one of them is tried;
* leading singleton cells fix a prefix of the encoding, and a subtree whose
  prefix already exceeds the best leaf is cut.

Encodings list adjacency bits column by column (pairs ``(i, j)`` with
``i < j`` ordered by ``j`` then ``i``) so that a fixed vertex prefix fixes a
bit prefix.
"""

from __future__ import annotations

from typing import Sequence

DEFAULT_VERTEX_CAP = 10_000


class DiscTooLargeError(ValueError):
    """The disc exceeds the vertex cap for exact canonicalization."""

    def __init__(self, vertex_count: int, cap: int):
        self.vertex_count = vertex_count
        self.cap = cap
        super().__init__(
            f"disc has {vertex_count} vertices, above the canonicalization cap of {cap}; "
            "d**k is too large for exact disc types"
        )


def _rename(sigs: list) -> tuple[list[int], int]:
    distinct = sorted(set(sigs))
    index = {s: i for i, s in enumerate(distinct)}
    return [index[s] for s in sigs], len(distinct)


def refine(adj: Sequence[Sequence[int]], colours: list[int]) -> list[int]:
    """Coarsest equitable refinement, with colours named canonically as 0..c-1."""
    colours, count = _rename(colours)
    while True:
        sigs = [(colours[v], tuple(sorted(colours[u] for u in adj[v]))) for v in range(len(adj))]
        new, new_count = _rename(sigs)
        if new_count == count:
            return new
        colours, count = new, new_count


def _individualize(colours: list[int], u: int) -> list[int]:
    c = colours[u]
    return [2 * x + (x == c and v != u) for v, x in enumerate(colours)]


def _column_bits(order: list[int], adjsets: list[set[int]], start: int, stop: int) -> list[int]:
    bits = []
    for j in range(start, stop):
        nj = adjsets[order[j]]
        bits.extend(1 if order[i] in nj else 0 for i in range(j))
    return bits


def canonical_bits(adj: Sequence[Sequence[int]], initial: Sequence) -> tuple[int, ...]:
    """Minimal column-major adjacency bitstring over all orders compatible with ``initial``.

    ``initial`` is any isomorphism-invariant vertex colouring (values only need
    to be mutually comparable).
    """
    m = len(adj)
    adjsets = [set(a) for a in adj]
    best: list[int] | None = None

    def search(colours: list[int]) -> None:
        nonlocal best
        cells: list[list[int]] = [[] for _ in range(max(colours) + 1)]
        for v, c in enumerate(colours):
            cells[c].append(v)
        p = 0
        while p < len(cells) and len(cells[p]) == 1:
            p += 1
        order = [cells[i][0] for i in range(p)]
        prefix = _column_bits(order, adjsets, 1, p)
        if best is not None and prefix > best[: len(prefix)]:
            return
        if p == len(cells):
            if best is None or prefix < best:
                best = prefix
            return
        tried: list[int] = []
        for u in cells[p]:
            if any(_twins(u, t, adjsets) for t in tried):
                continue
            tried.append(u)
            search(refine(adj, _individualize(colours, u)))

    search(refine(adj, list(initial)))
    assert best is not None and len(best) == m * (m - 1) // 2
    return tuple(best)


def _twins(u: int, w: int, adjsets: list[set[int]]) -> bool:
    return adjsets[u] - {w} == adjsets[w] - {u}


def pack(vertex_count: int, bits: Sequence[int]) -> bytes:
    out = bytearray(vertex_count.to_bytes(2, "big"))
    for i in range(0, len(bits), 8):
        chunk = bits[i : i + 8]
        byte = 0
        for b in chunk:
            byte = (byte << 1) | b
        out.append(byte << (8 - len(chunk)))
    return bytes(out)


def canonical_bytes(adj: Sequence[Sequence[int]], distance: Sequence[int],
                    cap: int = DEFAULT_VERTEX_CAP) -> bytes:
    """Canonical byte string of a rooted graph whose root has distance 0."""
    m = len(adj)
    if m > cap:
        raise DiscTooLargeError(m, cap)
    if m >= 1 << 16:
        raise DiscTooLargeError(m, (1 << 16) - 1)
    initial = [(distance[v], len(adj[v])) for v in range(m)]
    return pack(m, canonical_bits(adj, initial))

"""Combinatorial ideal triangulations of punctured surfaces.

A triangle lists its three sides in counterclockwise order; corner ``i`` is
the corner opposite side ``i``, and side ``i`` runs from corner ``i + 1`` to
corner ``i + 2`` (indices mod 3). Each edge has two sides, labelled 0 and 1,
and the two triangle slots holding them are glued orientation-reversingly.
That convention leaves no room for orientation data, so every document in
this format describes an orientable surface.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import EnumerationCapError, FlipError, SurfaceFormatError

DEFAULT_CAP = 10**7


class EdgeSide(NamedTuple):
    edge: int
    side: int


@dataclass(frozen=True)
class Triangle:
    id: int
    sides: tuple[EdgeSide, EdgeSide, EdgeSide]


@dataclass(frozen=True)
class Triangulation:
    name: str
    num_edges: int
    triangles: tuple[Triangle, ...]

    def __post_init__(self):
        _validate(self)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def side_edges(self) -> np.ndarray:
        """(F, 3) integer array: edge index held by each triangle slot."""
        return np.array([[s.edge for s in t.sides] for t in self.triangles], dtype=int).reshape(-1, 3)

    @cached_property
    def slot_of(self) -> dict[EdgeSide, tuple[int, int]]:
        return {s: (ti, k) for ti, t in enumerate(self.triangles) for k, s in enumerate(t.sides)}

    @cached_property
    def edge_slots(self) -> np.ndarray:
        """(E, 2, 2) array: ``[e, side] -> (triangle, position)``."""
        out = np.empty((self.num_edges, 2, 2), dtype=int)
        for (e, s), (t, k) in self.slot_of.items():
            out[e, s] = (t, k)
        return out

    def mate(self, t: int, k: int) -> tuple[int, int]:
        """The slot glued to slot ``k`` of triangle ``t``."""
        e, s = self.triangles[t].sides[k]
        return self.slot_of[EdgeSide(e, 1 - s)]

    @cached_property
    def moves(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per triangle, the distinct ``(edge, next triangle)`` crossings."""
        out = []
        for t in range(self.num_triangles):
            seen = []
            for k in range(3):
                step = (self.triangles[t].sides[k].edge, self.mate(t, k)[0])
                if step not in seen:
                    seen.append(step)
            out.append(tuple(seen))
        return tuple(out)

    @property
    def num_vertices(self) -> int:
        return len(vertex_orbits(self))

    @property
    def euler_characteristic(self) -> int:
        """Euler characteristic of the punctured surface, F - E."""
        return self.num_triangles - self.num_edges

    @property
    def closed_euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_triangles

    @property
    def genus(self) -> int:
        return (2 - self.closed_euler_characteristic) // 2

    def summary(self) -> dict:
        return {
            "name": self.name,
            "num_edges": self.num_edges,
            "num_triangles": self.num_triangles,
            "num_vertices": self.num_vertices,
            "genus": self.genus,
            "euler_characteristic": self.euler_characteristic,
        }


def _validate(T: Triangulation) -> None:
    E, F = T.num_edges, len(T.triangles)
    if E < 1 or F < 1:
        raise SurfaceFormatError("a triangulation needs at least one edge and one triangle")
    if 2 * E != 3 * F:
        raise SurfaceFormatError(f"2E != 3F (E={E}, F={F})")
    seen = set()
    for pos, tri in enumerate(T.triangles):
        if tri.id != pos:
            raise SurfaceFormatError(f"triangle ids must be 0..F-1 in order; got id {tri.id} at {pos}")
        if len(tri.sides) != 3:
            raise SurfaceFormatError(f"triangle {tri.id} does not have exactly 3 sides")
        for s in tri.sides:
            if not (0 <= s.edge < E) or s.side not in (0, 1):
                raise SurfaceFormatError(f"edge-side {tuple(s)} out of range in triangle {tri.id}")
            if s in seen:
                raise SurfaceFormatError(f"duplicate edge-side {tuple(s)}")
            seen.add(s)
    missing = [(e, s) for e in range(E) for s in (0, 1) if (e, s) not in seen]
    if missing:
        raise SurfaceFormatError(f"unreferenced edge-side {missing[0]}")
    # connectivity
    reach = {0}
    queue = deque([0])
    locate = {s: ti for ti, t in enumerate(T.triangles) for s in t.sides}
    while queue:
        t = queue.popleft()
        for e, s in T.triangles[t].sides:
            u = locate[EdgeSide(e, 1 - s)]
            if u not in reach:
                reach.add(u)
                queue.append(u)
    if len(reach) != F:
        raise SurfaceFormatError("disconnected surface")


# --- I/O ---------------------------------------------------------------------

def parse_surface(document) -> Triangulation:
    """Build a validated Triangulation from a JSON string or decoded dict."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SurfaceFormatError(f"malformed document: {exc}") from None
    try:
        name = str(document.get("name", "unnamed"))
        num_edges = document["num_edges"]
        raw = document["triangles"]
        if not isinstance(num_edges, int) or isinstance(num_edges, bool):
            raise TypeError("num_edges must be an integer")
        triangles = []
        for item in sorted(raw, key=lambda d: d["id"]):
            sides = tuple(EdgeSide(_as_int(s["edge"]), _as_int(s["side"])) for s in item["sides"])
            triangles.append(Triangle(_as_int(item["id"]), sides))
    except (KeyError, TypeError, AttributeError) as exc:
        raise SurfaceFormatError(f"malformed document: {exc!r}") from None
    return Triangulation(name, num_edges, tuple(triangles))


def _as_int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"expected an integer, got {v!r}")
    return v


def surface_document(T: Triangulation) -> dict:
    return {
        "name": T.name,
        "num_edges": T.num_edges,
        "triangles": [
            {"id": t.id, "sides": [{"edge": s.edge, "side": s.side} for s in t.sides]}
            for t in T.triangles
        ],
    }


def from_oriented_faces(name: str, faces) -> Triangulation:
    """Triangulation of a closed surface given by counterclockwise vertex triples."""
    edge_ids: dict[frozenset, int] = {}
    used: dict[int, int] = {}
    triangles = []
    for ti, (a, b, c) in enumerate(faces):
        corners = (a, b, c)
        sides = []
        for k in range(3):
            key = frozenset((corners[(k + 1) % 3], corners[(k + 2) % 3]))
            e = edge_ids.setdefault(key, len(edge_ids))
            side = used.get(e, -1) + 1
            used[e] = side
            sides.append(EdgeSide(e, side))
        triangles.append(Triangle(ti, tuple(sides)))
    return Triangulation(name, len(edge_ids), tuple(triangles))


def from_polygon_word(name: str, word) -> Triangulation:
    """Fan-triangulate a polygon whose boundary is glued by ``word``.

    ``word`` lists boundary letters, e.g. ``["a", "b", "a-", "b-"]``; a
    trailing ``-`` marks the inverse letter. Each letter must occur once
    plainly and once inverted (orientable gluing).
    """
    n = len(word)
    letters = {}
    for w in word:
        letters.setdefault(w.rstrip("-"), len(letters))
    nd = n - 3
    labels = {}
    for w in word:
        base = w.rstrip("-")
        labels[w] = EdgeSide(letters[base], 1 if w.endswith("-") else 0)
    if len(labels) != 2 * len(letters):
        raise SurfaceFormatError("each letter must appear once plainly and once inverted")
    diag = {k: len(letters) + k - 2 for k in range(2, n - 1)}  # diagonal p0-pk
    triangles = []
    for ti in range(n - 2):
        k = ti + 1  # triangle (p0, pk, pk+1)
        s0 = labels[word[k]]
        s1 = EdgeSide(diag[k + 1], 0) if k + 1 in diag else labels[word[k + 1 - n]]
        s2 = EdgeSide(diag[k], 1) if k in diag else labels[word[0]]
        triangles.append(Triangle(ti, (s0, s1, s2)))
    return Triangulation(name, len(letters) + nd, tuple(triangles))


# --- vertices -------------------------------------------------------------------

def vertex_orbits(T: Triangulation) -> list[list[tuple[int, int]]]:
    """Partition the corners ``(triangle, corner)`` into ideal vertices.

    Rotates around each vertex: corner ``i`` starts side ``i + 2``; across
    that side's mate slot ``j`` it is the end of side ``j``, i.e. corner
    ``j + 2`` of the neighbouring triangle.
    """
    seen = set()
    orbits = []
    for t in range(T.num_triangles):
        for i in range(3):
            if (t, i) in seen:
                continue
            orbit = []
            c = (t, i)
            while c not in seen:
                seen.add(c)
                orbit.append(c)
                u, j = T.mate(c[0], (c[1] + 2) % 3)
                c = (u, (j + 2) % 3)
            orbits.append(orbit)
    return orbits


# --- edge paths -------------------------------------------------------------------

@dataclass(frozen=True)
class EdgePath:
    triangles: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def is_loop(self) -> bool:
        return self.triangles[0] == self.triangles[-1]

    def __len__(self):
        return len(self.edges)

    def reversed(self) -> EdgePath:
        return EdgePath(self.triangles[::-1], self.edges[::-1])

    def to_dict(self) -> dict:
        return {"triangles": list(self.triangles), "edges": list(self.edges)}


def check_edge_path(T: Triangulation, path: EdgePath, kind: str = "path") -> None:
    """Raise ValueError unless ``path`` is a fundamental edge path/loop.

    ``kind`` is ``"path"``, ``"loop"`` or ``"any"`` (plain edge path).
    """
    ts, es = path.triangles, path.edges
    n = len(es)
    if n < 1 or len(ts) != n + 1:
        raise ValueError("an edge path alternates n+1 triangles with n >= 1 edges")
    for i, e in enumerate(es):
        if (e, ts[i + 1]) not in T.moves[ts[i]]:
            raise ValueError(f"triangles {ts[i]} and {ts[i + 1]} do not share edge {e}")
    for i in range(n - 1):
        if es[i] == es[i + 1]:
            raise ValueError(f"consecutive repeated edge {es[i]}")
    counts = np.bincount(es, minlength=T.num_edges)
    if kind == "path" and counts.max() > 1:
        raise ValueError("a fundamental path uses each edge at most once")
    if kind == "loop":
        if ts[0] != ts[-1]:
            raise ValueError("a loop must end where it starts")
        if counts.max() > 2:
            raise ValueError("a fundamental loop uses each edge at most twice")
        if n > 1 and es[0] == es[-1]:
            raise ValueError("a loop may not backtrack through its base triangle")


def enumerate_fundamental_paths(T: Triangulation, dedup: bool = False,
                                cap: int = DEFAULT_CAP) -> list[EdgePath]:
    """All fundamental edge paths with n >= 1, in DFS order.

    Each path is listed in both directions unless ``dedup`` keeps only the
    lexicographically smaller of a path and its reversal.
    """
    out = []
    used = [False] * T.num_edges
    budget = [cap]
    moves = T.moves

    def dfs(tris, edges):
        budget[0] -= 1
        if budget[0] < 0:
            raise EnumerationCapError(f"more than {cap} states visited")
        for e, u in moves[tris[-1]]:
            if used[e]:
                continue
            used[e] = True
            tris.append(u)
            edges.append(e)
            out.append(EdgePath(tuple(tris), tuple(edges)))
            dfs(tris, edges)
            tris.pop()
            edges.pop()
            used[e] = False

    for t0 in range(T.num_triangles):
        dfs([t0], [])
    if dedup:
        out = [p for p in out if _path_key(p) <= _path_key(p.reversed())]
    return out


def _path_key(p: EdgePath):
    return (p.triangles, p.edges)


def canonical_loop(triangles, edges) -> EdgePath:
    """Smallest rotation/reversal of a closed edge loop."""
    n = len(edges)
    fwd = [(triangles[i], edges[i]) for i in range(n)]
    bwd = [(triangles[i + 1], edges[i]) for i in range(n - 1, -1, -1)]
    best = None
    for seq in (fwd, bwd):
        for k in range(n):
            cand = tuple(seq[k:] + seq[:k])
            if best is None or cand < best:
                best = cand
    return EdgePath(tuple(p[0] for p in best) + (best[0][0],), tuple(p[1] for p in best))


def enumerate_fundamental_loops(T: Triangulation, cap: int = DEFAULT_CAP) -> list[EdgePath]:
    """All fundamental edge loops, one canonical representative each, sorted.

    Beyond the no-immediate-return rule we also require ``e_n != e_1`` for
    loops with more than one edge, so a loop never backtracks at its base.
    """
    found = set()
    count = [0] * T.num_edges
    budget = [cap]
    moves = T.moves

    for t0 in range(T.num_triangles):
        tris = [t0]
        edges: list[int] = []

        def dfs():
            budget[0] -= 1
            if budget[0] < 0:
                raise EnumerationCapError(f"more than {cap} states visited")
            last = edges[-1] if edges else -1
            for e, u in moves[tris[-1]]:
                if e == last or count[e] == 2:
                    continue
                count[e] += 1
                tris.append(u)
                edges.append(e)
                if u == t0 and (len(edges) == 1 or edges[0] != e):
                    found.add(canonical_loop(tris, edges))
                dfs()
                tris.pop()
                edges.pop()
                count[e] -= 1

        dfs()
    return sorted(found, key=lambda p: (len(p.edges), p.triangles, p.edges))


# --- flips --------------------------------------------------------------------------

def flip_quadrilateral(T: Triangulation, e: int) -> tuple[int, int, int, int]:
    """Edges ``(a, b, c, d)`` around the quadrilateral with diagonal ``e``.

    Listed cyclically so that ``a, c`` and ``b, d`` are opposite pairs.
    """
    (tA, i), (tB, j) = T.slot_of[EdgeSide(e, 0)], T.slot_of[EdgeSide(e, 1)]
    if tA == tB:
        raise FlipError(f"edge {e} bounds a single triangle on both sides; flip inadmissible")
    A, B = T.triangles[tA].sides, T.triangles[tB].sides
    return A[(i + 2) % 3].edge, B[(j + 1) % 3].edge, B[(j + 2) % 3].edge, A[(i + 1) % 3].edge


def flip_combinatorial(T: Triangulation, e: int) -> Triangulation:
    """Replace edge ``e`` by the other diagonal of its quadrilateral.

    The new diagonal keeps index ``e``; triangle ids are kept.
    """
    if not 0 <= e < T.num_edges:
        raise FlipError(f"edge {e} out of range")
    flip_quadrilateral(T, e)  # admissibility
    (tA, i), (tB, j) = T.slot_of[EdgeSide(e, 0)], T.slot_of[EdgeSide(e, 1)]
    A, B = T.triangles[tA].sides, T.triangles[tB].sides
    newA = (B[(j + 1) % 3], EdgeSide(e, 0), A[(i + 2) % 3])
    newB = (A[(i + 1) % 3], EdgeSide(e, 1), B[(j + 2) % 3])
    tris = list(T.triangles)
    tris[tA] = Triangle(tA, newA)
    tris[tB] = Triangle(tB, newB)
    return Triangulation(T.name, T.num_edges, tuple(tris))


def find_isomorphism(T1: Triangulation, T2: Triangulation):
    """An orientation-preserving combinatorial isomorphism, or None.

    Returns ``(triangle_map, edge_map)`` where ``triangle_map[t] = (u, r)``
    sends slot ``k`` of ``t`` to slot ``k + r`` of ``u``.
    """
    if (T1.num_edges, T1.num_triangles) != (T2.num_edges, T2.num_triangles):
        return None
    F = T1.num_triangles
    for u0 in range(F):
        for r0 in range(3):
            tmap = {0: (u0, r0)}
            emap: dict[int, int] = {}
            queue = deque([0])
            ok = True
            while queue and ok:
                t = queue.popleft()
                u, r = tmap[t]
                for k in range(3):
                    e1 = T1.triangles[t].sides[k].edge
                    e2 = T2.triangles[u].sides[(k + r) % 3].edge
                    if emap.setdefault(e1, e2) != e2:
                        ok = False
                        break
                    t1n, k1 = T1.mate(t, k)
                    t2n, k2 = T2.mate(u, (k + r) % 3)
                    want = (t2n, (k2 - k1) % 3)
                    if t1n in tmap:
                        if tmap[t1n] != want:
                            ok = False
                            break
                    else:
                        tmap[t1n] = want
                        queue.append(t1n)
            if ok and len(set(tmap.values())) == F and len(set(emap.values())) == T1.num_edges:
                return tmap, emap
    return None

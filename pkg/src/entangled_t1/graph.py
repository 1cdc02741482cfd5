"""Bipartite entanglement graphs, signatures and exponent thresholds."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import networkx as nx

from .errors import DegenerateGraph, Infeasible, ParseError

Edge = tuple[int, int]


@dataclass(frozen=True)
class BipartiteGraph:
    """Edges ``(i, j)`` with ``1 <= i <= m`` and ``1 <= j <= n``; no isolated vertices."""

    m: int
    n: int
    edges: frozenset[Edge]

    def __post_init__(self):
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        for i, j in edges:
            if not (1 <= i <= self.m and 1 <= j <= self.n):
                raise ValueError(f"edge {(i, j)} out of range for m={self.m}, n={self.n}")
        xs = {i for i, _ in edges}
        ys = {j for _, j in edges}
        if len(xs) != self.m or len(ys) != self.n:
            raise ValueError("graph has isolated vertices")

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], m: int | None = None, n: int | None = None) -> BipartiteGraph:
        edges = [tuple(e) for e in edges]
        return cls(m or max(i for i, _ in edges), n or max(j for _, j in edges), frozenset(edges))

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def neighbors_x(self, i: int) -> list[int]:
        return sorted(j for a, j in self.edges if a == i)

    def neighbors_y(self, j: int) -> list[int]:
        return sorted(i for i, b in self.edges if b == j)

    def transpose(self) -> BipartiteGraph:
        return BipartiteGraph(self.n, self.m, frozenset((j, i) for i, j in self.edges))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(("x", i) for i in range(1, self.m + 1))
        g.add_nodes_from(("y", j) for j in range(1, self.n + 1))
        g.add_edges_from((("x", i), ("y", j)) for i, j in self.edges)
        return g

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    def is_tree(self) -> bool:
        return nx.is_tree(self.to_networkx())

    def to_text(self) -> str:
        lines = [f"GRAPH m={self.m} n={self.n}"] + [f"{i} {j}" for i, j in self.sorted_edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> BipartiteGraph:
        rows = [(k, ln.split()) for k, ln in enumerate(text.splitlines(), 1)]
        rows = [(k, t) for k, t in rows if t and not t[0].startswith("#")]
        if not rows or rows[0][1][0] != "GRAPH":
            raise ParseError("expected 'GRAPH m=<m> n=<n>' header", rows[0][0] if rows else 1)
        fields = dict(tok.split("=", 1) for tok in rows[0][1][1:] if "=" in tok)
        try:
            m, n = int(fields["m"]), int(fields["n"])
        except (KeyError, ValueError) as exc:
            raise ParseError("header needs integer m and n", rows[0][0]) from exc
        edges = set()
        for k, toks in rows[1:]:
            if len(toks) != 2:
                raise ParseError("expected '<i> <j>'", k)
            try:
                i, j = int(toks[0]), int(toks[1])
            except ValueError as exc:
                raise ParseError("edge endpoints must be integers", k) from exc
            if not (1 <= i <= m and 1 <= j <= n):
                raise ParseError(f"edge ({i},{j}) out of range for m={m}, n={n}", k)
            if (i, j) in edges:
                raise ParseError(f"duplicate edge ({i},{j})", k)
            edges.add((i, j))
        try:
            return cls(m, n, frozenset(edges))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc


def cup_graph() -> BipartiteGraph:
    """The three-edge graph ``{(1,1), (1,2), (2,1)}``."""
    return BipartiteGraph(2, 2, frozenset({(1, 1), (1, 2), (2, 1)}))


def box_graph() -> BipartiteGraph:
    return complete_graph(2, 2)


def complete_graph(m: int, n: int) -> BipartiteGraph:
    return BipartiteGraph(m, n, frozenset(itertools.product(range(1, m + 1), range(1, n + 1))))


def matching_graph(n: int) -> BipartiteGraph:
    return BipartiteGraph(n, n, frozenset((j, j) for j in range(1, n + 1)))


def star_graph(n: int) -> BipartiteGraph:
    """One x-vertex joined to ``n`` y-vertices."""
    return BipartiteGraph(1, n, frozenset((1, j) for j in range(1, n + 1)))


def figure2_graph() -> BipartiteGraph:
    return BipartiteGraph(2, 3, frozenset({(1, 1), (1, 2), (1, 3), (2, 3)}))


@dataclass(frozen=True)
class Component:
    xs: frozenset[int]
    ys: frozenset[int]
    edges: frozenset[Edge]

    @property
    def is_complete(self) -> bool:
        return len(self.edges) == len(self.xs) * len(self.ys)


def components(g: BipartiteGraph) -> list[Component]:
    """Connected components ordered by their smallest x-vertex."""
    out = []
    for nodes in nx.connected_components(g.to_networkx()):
        xs = frozenset(v for side, v in nodes if side == "x")
        ys = frozenset(v for side, v in nodes if side == "y")
        edges = frozenset(e for e in g.edges if e[0] in xs)
        out.append(Component(xs, ys, edges))
    return sorted(out, key=lambda c: min(c.xs))


@dataclass(frozen=True)
class Signature:
    """Per-axis choice of indicator (``False``) or Haar function (``True``)."""

    a: tuple[bool, ...]
    b: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(bool(v) for v in self.a))
        object.__setattr__(self, "b", tuple(bool(v) for v in self.b))
        if not (any(self.a) or any(self.b)):
            raise ValueError("a signature needs at least one Haar axis")

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def n(self) -> int:
        return len(self.b)

    @property
    def S(self) -> frozenset[int]:
        return frozenset(i for i, h in enumerate(self.a, 1) if h)

    @property
    def T(self) -> frozenset[int]:
        return frozenset(j for j, h in enumerate(self.b, 1) if h)

    @property
    def flags(self) -> tuple[bool, ...]:
        """Haar flags for the axes ``x1..xm, y1..yn`` in order."""
        return self.a + self.b

    def code(self) -> str:
        return "".join("h" if f else "1" for f in self.flags)

    def __str__(self):
        return self.code()

    @classmethod
    def parse(cls, code: str, m: int) -> Signature:
        code = code.replace(";", "").replace(",", "")
        if set(code) - {"h", "1"}:
            raise ValueError(f"signature {code!r} must use only 'h' and '1'")
        flags = [c == "h" for c in code]
        return cls(tuple(flags[:m]), tuple(flags[m:]))

    @classmethod
    def from_sets(cls, m: int, n: int, S: Iterable[int], T: Iterable[int]) -> Signature:
        S, T = set(S), set(T)
        return cls(tuple(i in S for i in range(1, m + 1)), tuple(j in T for j in range(1, n + 1)))


def all_signatures(m: int, n: int) -> Iterator[Signature]:
    """All ``2^(m+n) - 1`` signatures, indicator-first lexicographic order."""
    for flags in itertools.product((False, True), repeat=m + n):
        if any(flags):
            yield Signature(flags[:m], flags[m:])


class ParaproductClass(str, enum.Enum):
    C1 = "C1"
    C2 = "C2"
    NC1 = "NC1"
    NC2 = "NC2"

    @property
    def cancellative(self) -> bool:
        return self in (ParaproductClass.C1, ParaproductClass.C2)


def classify_signature(g: BipartiteGraph, s: Signature) -> ParaproductClass:
    S, T = s.S, s.T
    if max(len(S), len(T)) >= 2:
        return ParaproductClass.C1
    if len(S) + len(T) == 1:
        return ParaproductClass.NC1
    (i,), (j,) = S, T
    return ParaproductClass.NC2 if (i, j) in g.edges else ParaproductClass.C2


def exponent_thresholds(g: BipartiteGraph) -> dict[Edge, int]:
    """Per-edge integer thresholds ``d`` with ``sum(1/d) > 1``."""
    if min(g.m, g.n) == 1:
        raise DegenerateGraph("no exponent range exists when one side has a single vertex")
    d: dict[Edge, int] = {}
    for c in components(g):
        size = max(len(c.xs), len(c.ys))
        val = size if c.is_complete or size <= 2 else size + 1
        for e in c.edges:
            d[e] = val
    if sum(Fraction(1, v) for v in d.values()) > 1:
        return d
    return _exceptional_tree(g)


def _exceptional_tree(g: BipartiteGraph) -> dict[Edge, int]:
    # only connected trees with a two-vertex side land here
    if not (g.is_tree() and min(g.m, g.n) == 2):
        raise AssertionError("component rule failed outside the two-vertex tree case")
    flipped = g.m != 2
    h = g.transpose() if flipped else g
    n = h.n
    deg = {i: len(h.neighbors_x(i)) for i in (1, 2)}
    big, small = (1, 2) if deg[1] >= deg[2] else (2, 1)
    (common,) = set(h.neighbors_x(big)) & set(h.neighbors_x(small))
    if deg[small] >= 2:
        d = {e: n for e in h.edges}
    else:
        d = {(big, j): n for j in h.neighbors_x(big)}
        d[(big, common)] = 2 * n - 2
        d[(small, common)] = n
    if flipped:
        d = {(j, i): v for (i, j), v in d.items()}
    return d


def feasibility_witness(d: dict[Edge, int]) -> dict[Edge, Fraction]:
    """Exponents ``p > d`` with ``sum(1/p) == 1``, obtained by scaling ``1/d``."""
    total = sum(Fraction(1, v) for v in d.values())
    if total <= 1:
        raise Infeasible(f"sum of 1/d is {total}, not above 1")
    return {e: v * total for e, v in d.items()}


def check_witness(d: dict[Edge, int], p: dict[Edge, Fraction]) -> bool:
    return set(d) == set(p) and sum(1 / q for q in p.values()) == 1 and all(p[e] > d[e] for e in d)

"""Knowledge-graph data model: TSV ingestion, inverted indices, topology statistics."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


class GraphParseError(ValueError):
    """Raised for malformed triple files."""


@dataclass(frozen=True)
class Triple:
    head: int
    predicate: int
    tail: int


class Vocabulary:
    """String <-> dense-index mapping, indices assigned in first-appearance order."""

    def __init__(self, names: Iterable[str] = ()):
        self._name_to_id: dict[str, int] = {}
        self._names: list[str] = []
        for n in names:
            self.add(n)

    def add(self, name: str) -> int:
        idx = self._name_to_id.get(name)
        if idx is None:
            idx = len(self._names)
            self._name_to_id[name] = idx
            self._names.append(name)
        return idx

    def index(self, name: str) -> int:
        return self._name_to_id[name]

    def name(self, idx: int) -> str:
        return self._names[idx]

    @property
    def names(self) -> list[str]:
        return list(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._name_to_id

    def __len__(self) -> int:
        return len(self._names)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._names == other._names


class KnowledgeGraph:
    """Immutable-after-load triple store with by-head/by-tail/by-predicate indices."""

    def __init__(self, entities: Vocabulary, predicates: Vocabulary,
                 triples: Sequence[Triple], duplicates_dropped: int = 0):
        self.entities = entities
        self.predicates = predicates
        self.triples: list[Triple] = list(triples)
        self.duplicates_dropped = duplicates_dropped
        self.by_head: list[list[int]] = [[] for _ in range(len(entities))]
        self.by_tail: list[list[int]] = [[] for _ in range(len(entities))]
        self.by_predicate: list[list[int]] = [[] for _ in range(len(predicates))]
        for i, t in enumerate(self.triples):
            self.by_head[t.head].append(i)
            self.by_tail[t.tail].append(i)
            self.by_predicate[t.predicate].append(i)

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_predicates(self) -> int:
        return len(self.predicates)

    @property
    def num_triples(self) -> int:
        return len(self.triples)

    @classmethod
    def from_named_triples(cls, rows: Iterable[tuple[str, str, str]]) -> "KnowledgeGraph":
        entities = Vocabulary()
        predicates = Vocabulary()
        triples: list[Triple] = []
        seen: set[tuple[int, int, int]] = set()
        dropped = 0
        for h, p, t in rows:
            key = (entities.add(h), predicates.add(p), entities.add(t))
            if key in seen:
                dropped += 1
                continue
            seen.add(key)
            triples.append(Triple(key[0], key[1], key[2]))
        return cls(entities, predicates, triples, duplicates_dropped=dropped)


def load_triples(paths: str | Path | Sequence[str | Path]) -> KnowledgeGraph:
    """Load one or more head<TAB>predicate<TAB>tail files into a single graph.

    Multiple paths are unioned (duplicate facts across files are dropped with
    a counted warning). Vocabulary order follows first appearance across the
    files in the order given.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    if not paths:
        raise GraphParseError("no input files given")

    def rows():
        for path in paths:
            path = Path(path)
            with path.open("r", encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.rstrip("\n").rstrip("\r")
                    if not line.strip():
                        continue
                    fields = line.split("\t")
                    if len(fields) != 3:
                        raise GraphParseError(
                            f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}")
                    yield fields[0], fields[1], fields[2]

    g = KnowledgeGraph.from_named_triples(rows())
    if g.num_triples == 0:
        raise GraphParseError(f"no triples found in {', '.join(str(p) for p in paths)}")
    if g.duplicates_dropped:
        warnings.warn(f"dropped {g.duplicates_dropped} duplicate triples", stacklevel=2)
    return g


def save_triples(g: KnowledgeGraph, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for t in g.triples:
            fh.write(f"{g.entities.name(t.head)}\t{g.predicates.name(t.predicate)}"
                     f"\t{g.entities.name(t.tail)}\n")


@dataclass
class GraphStats:
    num_entities: int
    num_predicates: int
    num_triples: int
    num_multi_edge_triples: int
    num_scc: int
    num_wcc: int

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)


def _entity_adjacency(g: KnowledgeGraph) -> list[list[int]]:
    # Directed entity graph, parallel predicate edges collapsed.
    adj: list[set[int]] = [set() for _ in range(g.num_entities)]
    for t in g.triples:
        adj[t.head].add(t.tail)
    return [sorted(s) for s in adj]


def _tarjan_scc_count(adj: list[list[int]]) -> int:
    """Number of strongly connected components (iterative Tarjan)."""
    n = len(adj)
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    count = 0
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        # work items: (node, iterator position)
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            neighbors = adj[v]
            for i in range(pi, len(neighbors)):
                w = neighbors[i]
                if index[w] == -1:
                    work.append((v, i + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    if index[w] < lowlink[v]:
                        lowlink[v] = index[w]
            if recurse:
                continue
            if lowlink[v] == index[v]:
                count += 1
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    if w == v:
                        break
            if work:
                parent = work[-1][0]
                if lowlink[v] < lowlink[parent]:
                    lowlink[parent] = lowlink[v]
    return count


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.n_components = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.n_components -= 1


def _multi_edge_pairs(g: KnowledgeGraph) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], set[int]] = {}
    for t in g.triples:
        counts.setdefault((t.head, t.tail), set()).add(t.predicate)
    return {pair: len(preds) for pair, preds in counts.items()}


def multi_predicate_triple_ids(g: KnowledgeGraph) -> list[int]:
    """Indices of triples whose (head, tail) pair carries >= 2 distinct predicates."""
    pair_preds = _multi_edge_pairs(g)
    return [i for i, t in enumerate(g.triples) if pair_preds[(t.head, t.tail)] >= 2]


def compute_stats(g: KnowledgeGraph) -> GraphStats:
    if g.num_triples == 0:
        raise ValueError("empty graph")
    adj = _entity_adjacency(g)
    num_scc = _tarjan_scc_count(adj)
    uf = UnionFind(g.num_entities)
    for t in g.triples:
        uf.union(t.head, t.tail)
    num_multi = len(multi_predicate_triple_ids(g))
    return GraphStats(
        num_entities=g.num_entities,
        num_predicates=g.num_predicates,
        num_triples=g.num_triples,
        num_multi_edge_triples=num_multi,
        num_scc=num_scc,
        num_wcc=uf.n_components,
    )

"""Atom structures over inflated graphs.

An atom is a pair (k, sim): a partial map from the n coordinates to vertices
of the inflated graph, plus a partition of the coordinate set.  Partitions
are canonical block-index tuples (block numbers appear in order of first
occurrence, so (0, 1, 0) identifies coordinates 0 and 2).  The three validity
clauses are:

  * one block per coordinate: k total and its image contains an edge;
  * exactly one two-element block {i, j}: k defined exactly on i, j with
    k[i] == k[j];
  * fewer blocks than that: k nowhere defined.

Coordinate i carries a defined k[i] exactly when the partition keeps all
other coordinates pairwise separate ("i-distinguishing").
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

from .errors import SizeLimitError
from .graph import Graph, inflate

DEFAULT_ATOM_BOUND = 5000
MIN_DIMENSION = 3
MAX_DIMENSION = 5


def canonical_partition(labels) -> tuple[int, ...]:
    """Relabel a block vector so block indices appear in first-occurrence order."""
    remap: dict[int, int] = {}
    out = []
    for lbl in labels:
        if lbl not in remap:
            remap[lbl] = len(remap)
        out.append(remap[lbl])
    return tuple(out)


@lru_cache(maxsize=None)
def all_partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """All canonical partitions of {0..n-1}, in lexicographic order."""
    out = [()]
    for _ in range(n):
        nxt = []
        for prefix in out:
            top = max(prefix, default=-1)
            for b in range(top + 2):
                nxt.append(prefix + (b,))
        out = nxt
    return tuple(sorted(out))


def num_blocks(sim: tuple[int, ...]) -> int:
    return max(sim) + 1 if sim else 0


def restrict_partition(sim: tuple[int, ...], i: int) -> tuple[int, ...]:
    """Canonical restriction to the coordinates other than i, in index order."""
    return canonical_partition(sim[j] for j in range(len(sim)) if j != i)


def is_i_distinguishing(sim: tuple[int, ...], i: int) -> bool:
    """No two distinct coordinates outside i share a block."""
    seen = set()
    for j, b in enumerate(sim):
        if j == i:
            continue
        if b in seen:
            return False
        seen.add(b)
    return True


def partition_pair_block(sim: tuple[int, ...]) -> tuple[int, int]:
    """The unique two-element block, when the partition has n-1 blocks."""
    by_block: dict[int, list[int]] = {}
    for j, b in enumerate(sim):
        by_block.setdefault(b, []).append(j)
    pairs = [v for v in by_block.values() if len(v) == 2]
    if len(pairs) != 1 or num_blocks(sim) != len(sim) - 1:
        raise ValueError("partition does not have a unique pair block")
    return pairs[0][0], pairs[0][1]


def subst_partition(sim: tuple[int, ...], sigma: tuple[int, ...]) -> tuple[int, ...]:
    """i and j related in the result iff sigma(i) and sigma(j) are related."""
    return canonical_partition(sim[sigma[i]] for i in range(len(sim)))


@lru_cache(maxsize=None)
def all_sigmas(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.product(range(n), repeat=n))


@lru_cache(maxsize=None)
def sigma_rank(n: int) -> dict[tuple[int, ...], int]:
    return {s: r for r, s in enumerate(all_sigmas(n))}


def compose_sigma(sigma, tau) -> tuple[int, ...]:
    """(sigma after tau)(i) = sigma(tau(i))."""
    return tuple(sigma[tau[i]] for i in range(len(sigma)))


@dataclass(frozen=True)
class Atom:
    k: tuple[int | None, ...]
    sim: tuple[int, ...]

    def sort_key(self):
        return (self.sim, tuple(-1 if v is None else v for v in self.k))


def atom_is_valid(atom: Atom, inflated: Graph) -> bool:
    n = len(atom.sim)
    if len(atom.k) != n or atom.sim != canonical_partition(atom.sim):
        return False
    for v in atom.k:
        if v is not None and not 0 <= v < inflated.vertex_count:
            return False
    blocks = num_blocks(atom.sim)
    if blocks == n:
        if any(v is None for v in atom.k):
            return False
        image = set(atom.k)
        return any(inflated.has_edge(u, v) for u in image for v in image if u < v)
    if blocks == n - 1:
        i, j = partition_pair_block(atom.sim)
        dom = {idx for idx, v in enumerate(atom.k) if v is not None}
        return dom == {i, j} and atom.k[i] == atom.k[j]
    return all(v is None for v in atom.k)


def diag_member(atom: Atom, i: int, j: int) -> bool:
    return atom.sim[i] == atom.sim[j]


def cyl_equiv(a: Atom, b: Atom, i: int) -> bool:
    """Same value at coordinate i (undefined counts as equal) and same restriction."""
    return a.k[i] == b.k[i] and restrict_partition(a.sim, i) == restrict_partition(b.sim, i)


def subst_atom(atom: Atom, sigma: tuple[int, ...]) -> Atom:
    """Substitution action: partition pulled back along sigma, values rebuilt.

    The new value at i exists iff the new partition is i-distinguishing, and
    is then the old value at the unique coordinate missed by sigma off i.
    """
    n = len(atom.sim)
    new_sim = subst_partition(atom.sim, sigma)
    new_k: list[int | None] = [None] * n
    for i in range(n):
        if is_i_distinguishing(new_sim, i):
            hit = {sigma[j] for j in range(n) if j != i}
            missed = [j for j in range(n) if j not in hit]
            assert len(missed) == 1
            new_k[i] = atom.k[missed[0]]
    return Atom(tuple(new_k), new_sim)


class AtomStructure:
    """Indexed list of all valid atoms over an inflated graph.

    The atom order is fixed (lexicographic on (partition, value vector with
    undefined as -1)) so downstream bit-vector algebra elements are portable
    across runs.
    """

    def __init__(self, base_graph: Graph, n: int, atoms: list[Atom]):
        self.base_graph = base_graph
        self.n = n
        self.inflated = inflate(base_graph, n)
        self.atoms: tuple[Atom, ...] = tuple(sorted(atoms, key=Atom.sort_key))
        self._index = {a: i for i, a in enumerate(self.atoms)}
        self._tables = None

    def __len__(self):
        return len(self.atoms)

    def index_of(self, atom: Atom) -> int:
        return self._index[atom]

    def contains(self, atom: Atom) -> bool:
        return atom in self._index

    def golden_hash(self) -> str:
        payload = [[list(a.sim), [-1 if v is None else v for v in a.k]] for a in self.atoms]
        blob = json.dumps(payload, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def atom_to_json(self, atom: Atom) -> dict:
        return {"sim": list(atom.sim), "K": [None if v is None else v for v in atom.k]}

    def tables(self):
        from .bao import RelStructure  # local import to avoid a cycle

        if self._tables is None:
            self._tables = RelStructure.from_atom_structure(self)
        return self._tables


def enumerate_atoms(g: Graph, n: int, max_atoms: int = DEFAULT_ATOM_BOUND) -> AtomStructure:
    """All valid atoms over g inflated n ways, in the fixed order."""
    if not MIN_DIMENSION <= n <= MAX_DIMENSION:
        raise ValueError(f"dimension must be in {MIN_DIMENSION}..{MAX_DIMENSION}")
    if g.vertex_count < 1:
        raise ValueError("base graph needs at least one vertex")
    infl = inflate(g, n)
    nv = infl.vertex_count
    atoms: list[Atom] = []

    def push(atom):
        atoms.append(atom)
        if len(atoms) > max_atoms:
            raise SizeLimitError(
                f"atom count exceeds bound {max_atoms} for this graph at n={n}")

    for sim in all_partitions(n):
        blocks = num_blocks(sim)
        if blocks < n - 1:
            push(Atom((None,) * n, sim))
        elif blocks == n - 1:
            i, j = partition_pair_block(sim)
            for v in range(nv):
                k: list[int | None] = [None] * n
                k[i] = k[j] = v
                push(Atom(tuple(k), sim))
        else:
            for values in itertools.product(range(nv), repeat=n):
                image = set(values)
                if any(infl.has_edge(u, v) for u in image for v in image if u < v):
                    push(Atom(values, sim))
    return AtomStructure(g, n, atoms)

"""Finite boolean algebras with operators, as complex algebras of atom structures.

Elements are ints used as bitmasks over the atom index space.  Operator data
lives in a RelStructure: diagonal masks, one equivalence relation per
cylindrification (stored as class ids plus class masks), and one atom-index
table per substitution map.  The same RelStructure type describes both
graph-derived structures and ultrafilter structures recovered from an
algebra, so the round trip algebra -> ultrafilter structure -> complex
algebra can be compared exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .atoms import AtomStructure, all_sigmas, restrict_partition, sigma_rank
from .bitset import iter_bits
from .errors import SizeLimitError

SIGNATURES = {
    "Df": frozenset("c"),
    "CA": frozenset("cd"),
    "PA": frozenset("cs"),
    "PEA": frozenset("cds"),
}


@dataclass(frozen=True)
class RelStructure:
    n: int
    natoms: int
    diag_masks: tuple[tuple[int, ...], ...]       # [i][j] -> atom mask
    cyl_class_of: tuple[tuple[int, ...], ...]     # [i][atom] -> class id
    cyl_class_masks: tuple[tuple[int, ...], ...]  # [i][class id] -> atom mask
    subst_tables: tuple[tuple[int, ...], ...]     # [sigma rank][atom] -> image atom

    @classmethod
    def from_atom_structure(cls, s: AtomStructure) -> "RelStructure":
        n = s.n
        atoms = s.atoms
        diag = tuple(
            tuple(sum(1 << a for a, atom in enumerate(atoms) if atom.sim[i] == atom.sim[j])
                  for j in range(n))
            for i in range(n))
        class_of, class_masks = [], []
        for i in range(n):
            ids: dict[tuple, int] = {}
            per_atom = []
            masks: list[int] = []
            for a, atom in enumerate(atoms):
                key = (atom.k[i], restrict_partition(atom.sim, i))
                cid = ids.setdefault(key, len(ids))
                if cid == len(masks):
                    masks.append(0)
                masks[cid] |= 1 << a
                per_atom.append(cid)
            class_of.append(tuple(per_atom))
            class_masks.append(tuple(masks))
        from .atoms import subst_atom
        subst = []
        for sigma in all_sigmas(n):
            subst.append(tuple(s.index_of(subst_atom(atom, sigma)) for atom in atoms))
        return cls(n, len(atoms), diag, tuple(class_of), tuple(class_masks), tuple(subst))

    def subst_for(self, sigma: tuple[int, ...]) -> tuple[int, ...]:
        return self.subst_tables[sigma_rank(self.n)[sigma]]

    def same_structure(self, other: "RelStructure") -> bool:
        """Equality of relations under the identity map on atom indices."""
        if (self.n, self.natoms) != (other.n, other.natoms):
            return False
        if self.diag_masks != other.diag_masks:
            return False
        if self.subst_tables != other.subst_tables:
            return False
        for i in range(self.n):
            mine, theirs = self.cyl_class_of[i], other.cyl_class_of[i]
            mmasks, tmasks = self.cyl_class_masks[i], other.cyl_class_masks[i]
            for a in range(self.natoms):
                if mmasks[mine[a]] != tmasks[theirs[a]]:
                    return False
        return True


class FiniteBao:
    """Complex algebra over a RelStructure, restricted to one signature."""

    def __init__(self, rel: RelStructure, signature: str = "PEA",
                 atom_structure: AtomStructure | None = None):
        if signature not in SIGNATURES:
            raise ValueError(f"unknown signature {signature!r}")
        self.rel = rel
        self.signature = signature
        self.ops = SIGNATURES[signature]
        self.atom_structure = atom_structure
        self.n = rel.n
        self.natoms = rel.natoms
        self.top = (1 << rel.natoms) - 1
        self._dist: list[int] | None = None

    # boolean layer -------------------------------------------------------
    def neg(self, x: int) -> int:
        return self.top ^ x

    def is_atom(self, x: int) -> bool:
        return x != 0 and x & (x - 1) == 0

    def atoms_in(self, x: int):
        return iter_bits(x)

    # operators -----------------------------------------------------------
    def c(self, i: int, x: int) -> int:
        """Cylindrification: union of the equivalence classes meeting x."""
        out = 0
        seen = set()
        class_of = self.rel.cyl_class_of[i]
        masks = self.rel.cyl_class_masks[i]
        for a in iter_bits(x):
            cid = class_of[a]
            if cid not in seen:
                seen.add(cid)
                out |= masks[cid]
        return out

    def d(self, i: int, j: int) -> int:
        if "d" not in self.ops:
            raise ValueError(f"diagonals not in signature {self.signature}")
        return self.rel.diag_masks[i][j]

    def s(self, sigma: tuple[int, ...], x: int) -> int:
        """Substitution: preimage of x under the atom action."""
        if "s" not in self.ops:
            raise ValueError(f"substitutions not in signature {self.signature}")
        table = self.rel.subst_for(sigma)
        out = 0
        for a in range(self.natoms):
            if x >> table[a] & 1:
                out |= 1 << a
        return out

    # derived elements ------------------------------------------------------
    def dist_element(self, i: int) -> int:
        """Element whose atoms are exactly the i-distinguishing ones."""
        if self._dist is None:
            self._dist = []
            for ii in range(self.n):
                acc = self.top
                for j in range(self.n):
                    for k in range(j + 1, self.n):
                        if ii not in (j, k):
                            acc &= self.neg(self.rel.diag_masks[j][k])
                self._dist.append(acc)
        return self._dist[i]

    def d_partition(self, sim: tuple[int, ...]) -> int:
        """Meet of d_ij over related pairs and -d_ij over unrelated ones."""
        acc = self.top
        for i in range(self.n):
            for j in range(self.n):
                dij = self.rel.diag_masks[i][j]
                acc &= dij if sim[i] == sim[j] else self.neg(dij)
        return acc

    def dims(self, x: int) -> frozenset[int]:
        """Coordinates whose cylindrification moves x."""
        return frozenset(i for i in range(self.n) if self.c(i, x) != x)

    def discriminator(self, x: int) -> int:
        """c_1 .. c_{n-1} c_{n-1} .. c_1 x."""
        order = list(range(1, self.n)) + list(range(self.n - 1, 0, -1))
        for i in reversed(order):
            x = self.c(i, x)
        return x

    # sampling --------------------------------------------------------------
    def bias_pool(self) -> list[int]:
        pool = [0, self.top]
        if "d" in self.ops:
            for i in range(self.n):
                for j in range(self.n):
                    pool.append(self.rel.diag_masks[i][j])
            for i in range(self.n):
                pool.append(self.dist_element(i))
        step = max(1, self.natoms // 7)
        for a in range(0, self.natoms, step):
            pool.append(1 << a)
            pool.append(self.top ^ (1 << a))
        return pool

    def sample_element(self, rng: random.Random, pool: list[int] | None = None) -> int:
        if pool and rng.random() < 0.125:
            return rng.choice(pool)
        return rng.getrandbits(self.natoms) if self.natoms else 0

    # structure recovery ------------------------------------------------------
    def ultrafilter_structure(self) -> RelStructure:
        """Atom structure of the principal ultrafilters.

        One ultrafilter per atom; a relation holds of a tuple of
        ultrafilters when the operator image of the generators lands inside
        the result ultrafilter.  For unary operators that reduces to reading
        the operator off singleton elements, which is done here in one batch
        pass per operator.
        """
        nat = self.natoms
        diag = tuple(tuple(self.rel.diag_masks[i][j] for j in range(self.n))
                     for i in range(self.n))
        class_of, class_masks = [], []
        for i in range(self.n):
            ids: dict[int, int] = {}
            per_atom, masks = [], []
            for a in range(nat):
                mask = self.c(i, 1 << a)
                cid = ids.setdefault(mask, len(ids))
                if cid == len(masks):
                    masks.append(mask)
                per_atom.append(cid)
            if sum(m.bit_count() for m in masks) != nat:
                raise ValueError("cylindrification does not induce a partition")
            for a in range(nat):
                if not masks[per_atom[a]] >> a & 1:
                    raise ValueError("cylindrification is not reflexive")
            class_of.append(tuple(per_atom))
            class_masks.append(tuple(masks))
        subst = []
        for sigma in all_sigmas(self.n):
            table = self.rel.subst_for(sigma)
            preimage = [0] * nat
            for a in range(nat):
                # batch evaluation of s_sigma on every singleton at once
                preimage[table[a]] |= 1 << a
            images = [-1] * nat
            for x in range(nat):
                for y in iter_bits(preimage[x]):
                    if images[y] >= 0:
                        raise ValueError("substitution preimages overlap")
                    images[y] = x
            if any(v < 0 for v in images):
                raise ValueError("substitution preimages do not cover")
            subst.append(tuple(images))
        return RelStructure(self.n, nat, diag, tuple(class_of), tuple(class_masks),
                            tuple(subst))

    def canonical_extension(self) -> tuple["FiniteBao", list[int]]:
        """Complex algebra of the ultrafilter structure, plus the witness map.

        For a finite algebra the canonical embedding sends each element to
        the set of principal ultrafilters containing it, which is the
        identity on bitmasks; the witness is that identity on atom indices.
        """
        ext = FiniteBao(self.ultrafilter_structure(), self.signature)
        return ext, list(range(self.natoms))

    # subalgebras ---------------------------------------------------------
    def generated_subalgebra(self, gens, bound: int = 4096) -> list[int]:
        """Least subuniverse containing gens, closed under the signature.

        Closures of even single atoms routinely blow past any usable bound
        (the boolean layer generates the power set of the reachable regions);
        callers should be prepared to fall back to fewer generators.
        """
        import heapq

        elems = {0, self.top}
        if "d" in self.ops:
            for i in range(self.n):
                for j in range(self.n):
                    elems.add(self.rel.diag_masks[i][j])
        elems.update(gens)
        processed: list[int] = []
        queue = sorted(elems)
        heapq.heapify(queue)
        while queue:
            x = heapq.heappop(queue)
            new = [self.neg(x)]
            for i in range(self.n):
                new.append(self.c(i, x))
            if "s" in self.ops:
                for sigma in all_sigmas(self.n):
                    new.append(self.s(sigma, x))
            for y in processed:
                new.append(x | y)
                new.append(x & y)
            processed.append(x)
            for y in new:
                if y not in elems:
                    elems.add(y)
                    heapq.heappush(queue, y)
                    if len(elems) > bound:
                        raise SizeLimitError(f"subalgebra exceeds bound {bound}")
        return sorted(elems)


def complex_algebra(s: AtomStructure, signature: str = "PEA",
                    atom_bound: int | None = None) -> FiniteBao:
    if atom_bound is not None and len(s) > atom_bound:
        raise SizeLimitError(f"{len(s)} atoms exceed bound {atom_bound}")
    return FiniteBao(s.tables(), signature, atom_structure=s)


def corrupt_cyl_table(rel: RelStructure, i: int = 0, atom: int = 0) -> RelStructure:
    """Test fixture: drop one atom from its own equivalence class mask.

    The relation loses reflexivity at that atom, so x <= c_i x fails there.
    """
    per_atom = rel.cyl_class_of[i]
    masks = list(rel.cyl_class_masks[i])
    masks[per_atom[atom]] &= ~(1 << atom)
    class_masks = list(rel.cyl_class_masks)
    class_masks[i] = tuple(masks)
    return replace(rel, cyl_class_masks=tuple(class_masks))

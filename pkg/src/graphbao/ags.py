"""Three-sorted algebra-graph systems over a finite base graph.

A model couples the complex algebra over the atom structure with the
inflated graph and its full power set.  The two connecting maps send an
algebra element to the set of values its distinguishing atoms take at a
coordinate (the projection), and a vertex set to the distinguishing atoms
whose value lies inside it (the lift).  The copy-block relation partitions
the inflated graph into the n copies; vertices in different blocks are
always adjacent.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property

from .atoms import AtomStructure, all_sigmas, enumerate_atoms, DEFAULT_ATOM_BOUND
from .bao import FiniteBao, complex_algebra
from .bitset import iter_bits
from .graph import Graph, chromatic_number, coverable_by_independent_sets
from .report import Report


@dataclass
class AgsModel:
    algebra: FiniteBao
    structure: AtomStructure
    base_graph: Graph
    n: int

    def __post_init__(self):
        self.graph = self.structure.inflated
        self.vertex_count = self.graph.vertex_count
        self.vtop = (1 << self.vertex_count) - 1
        base = self.base_graph.vertex_count
        self.h_masks = tuple(((1 << base) - 1) << (i * base) for i in range(self.n))
        # value of each atom at each coordinate (-1 when undefined)
        self.atom_value = tuple(
            tuple(-1 if atom.k[i] is None else atom.k[i] for atom in self.structure.atoms)
            for i in range(self.n))
        lift = []
        for i in range(self.n):
            per_vertex = [0] * self.vertex_count
            dist = self.algebra.dist_element(i)
            for a in iter_bits(dist):
                per_vertex[self.atom_value[i][a]] |= 1 << a
            lift.append(tuple(per_vertex))
        self._lift_masks = tuple(lift)

    @cached_property
    def chi_inflated(self) -> int:
        return chromatic_number(self.graph)[0]

    def proj(self, i: int, a: int) -> int:
        """Vertex set of the values taken at coordinate i by the
        i-distinguishing atoms under a."""
        out = 0
        values = self.atom_value[i]
        for atom in iter_bits(a & self.algebra.dist_element(i)):
            out |= 1 << values[atom]
        return out

    def lift(self, i: int, vertex_set: int) -> int:
        """Atoms that are i-distinguishing with value inside the vertex set."""
        out = 0
        masks = self._lift_masks[i]
        for v in iter_bits(vertex_set):
            out |= masks[v]
        return out

    def same_block(self, x: int, y: int) -> bool:
        return any(m >> x & 1 and m >> y & 1 for m in self.h_masks)

    def sample_vertex_set(self, rng: random.Random) -> int:
        return rng.getrandbits(self.vertex_count) if self.vertex_count else 0


def build_model(g: Graph, n: int, signature: str = "PEA",
                atom_bound: int = DEFAULT_ATOM_BOUND) -> AgsModel:
    structure = enumerate_atoms(g, n, max_atoms=atom_bound)
    algebra = complex_algebra(structure, signature)
    return AgsModel(algebra, structure, g, n)


def theta(m: AgsModel, k: int) -> bool:
    """True iff the inflated graph cannot be covered by k independent sets.

    With the set sort equal to the full power set this is exactly
    chi(inflated) > k; the exact solver is the fast route and the literal
    cover enumeration below stays available as an oracle.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    return m.chi_inflated > k


def theta_by_cover_search(m: AgsModel, k: int) -> bool:
    """Oracle for theta via exact cover by maximal independent sets."""
    return not coverable_by_independent_sets(m.graph, k)


def theta_literal(m: AgsModel, k: int, max_products: int = 2 * 10 ** 6) -> bool:
    """Literal quantifier reading: search all k-tuples of independent sets
    for one covering the vertices.  Only for tiny models."""
    import itertools

    from .errors import InfeasibleError

    g = m.graph
    independents = [s for s in range(1 << g.vertex_count) if _is_independent(g, s)]
    if len(independents) ** max(k, 1) > max_products:
        raise InfeasibleError("literal theta enumeration too large")
    if k == 0:
        return m.vtop != 0
    for combo in itertools.product(independents, repeat=k):
        union = 0
        for s in combo:
            union |= s
        if union == m.vtop:
            return False
    return True


def _is_independent(g: Graph, s: int) -> bool:
    return all(not (g.adj[u] & s) for u in iter_bits(s))


# property suites -------------------------------------------------------------

def check_block_structure(m: AgsModel) -> Report:
    """Copy blocks partition the vertices; distinct-block vertices are adjacent."""
    report = Report("block-structure")
    union = 0
    disjoint = True
    for mask in m.h_masks:
        if union & mask:
            disjoint = False
        union |= mask
    report.add("blocks partition the vertex set", disjoint and union == m.vtop)
    cross_ok = True
    for x in range(m.vertex_count):
        for y in range(m.vertex_count):
            if x != y and not m.same_block(x, y) and not m.graph.has_edge(x, y):
                cross_ok = False
    report.add("vertices in distinct blocks are adjacent", cross_ok)
    return report


def check_rs_properties(m: AgsModel, seed: int = 1, samples: int = 300) -> Report:
    """Projection/lift interplay; concrete items exhaustive, quantified sampled."""
    rng = random.Random(seed)
    A = m.algebra
    report = Report("proj-lift", {"seed": seed, "samples": samples})
    pool = A.bias_pool()

    ok, ce = True, None
    for _ in range(samples):
        b = A.sample_element(rng, pool)
        a = b & A.sample_element(rng, pool)
        for i in range(m.n):
            if m.proj(i, a) & ~m.proj(i, b):
                ok, ce = False, {"a": hex(a), "b": hex(b), "i": i}
    report.add("monotone projection", ok, ce)

    ok, ce = True, None
    for _ in range(samples):
        x = A.sample_element(rng, pool)
        for i in range(m.n):
            for j in range(m.n):
                if i == j:
                    continue
                b = x & A.d(i, j)
                if m.proj(i, b) != m.proj(j, b):
                    ok, ce = False, {"b": hex(b), "i": i, "j": j}
    report.add("projections agree under the diagonal", ok, ce)

    ok, ce = True, None
    for _ in range(samples):
        for i in range(m.n):
            a = A.sample_element(rng, pool) & A.dist_element(i)
            if a & ~m.lift(i, m.proj(i, a)):
                ok, ce = False, {"a": hex(a), "i": i}
    report.add("lift of projection covers", ok, ce)

    ok, ce = True, None
    for _ in range(samples):
        x = A.sample_element(rng, pool)
        y = A.sample_element(rng, pool)
        for i in range(m.n):
            for j in range(m.n):
                if i == j:
                    continue
                dij = A.d(i, j)
                f = lambda e: m.proj(i, e & dij)
                if f(x | y) != (f(x) | f(y)) or f(A.neg(x)) != (m.vtop ^ f(x)):
                    ok, ce = False, {"x": hex(x), "y": hex(y), "i": i, "j": j}
    report.add("masked projection is a boolean homomorphism", ok, ce)
    concrete = all(m.proj(i, A.dist_element(i) & A.d(i, j)) == m.vtop
                   for i in range(m.n) for j in range(m.n) if i != j)
    report.add("masked projection sends its unit to the full set", concrete)

    exhaustive = m.vertex_count <= 8
    sets = (range(1 << m.vertex_count) if exhaustive
            else (m.sample_vertex_set(rng) for _ in range(samples)))
    ok, ce, okc, cec = True, None, True, None
    for B in sets:
        for i in range(m.n):
            lifted = m.lift(i, B)
            if m.proj(i, lifted) != B:
                ok, ce = False, {"B": hex(B), "i": i}
            if A.c(i, lifted) != lifted:
                okc, cec = False, {"B": hex(B), "i": i}
    mode = {"mode": "exhaustive" if exhaustive else "sampled"}
    report.add("projection undoes lift", ok, ce or mode)
    report.add("lifts are cylindrified fixpoints", okc, cec or mode)
    return report


def check_projection_properties(m: AgsModel, seed: int = 1) -> Report:
    """Exhaustive atom-level facts about ultrafilter projections.

    Principal ultrafilters are identified with their generating atoms, and
    projections with the generating vertex (or the improper marker when the
    atom is not distinguishing at that coordinate).
    """
    A = m.algebra
    report = Report("projections", {"seed": seed})
    n = m.n

    def proj_point(atom: int, i: int):
        """Vertex generating the projection, or None for the improper filter."""
        if A.dist_element(i) >> atom & 1:
            return m.atom_value[i][atom]
        return None

    ok = True
    for a in range(A.natoms):
        for i in range(n):
            image = m.proj(i, 1 << a)
            if proj_point(a, i) is None:
                # improper case: every vertex set is some projection above a
                if image != 0 or any(
                        m.proj(i, (1 << a) | m.lift(i, B)) != B
                        for B in _vertex_set_samples(m)):
                    ok = False
            elif image != 1 << proj_point(a, i):
                ok = False
    report.add("projection of a principal ultrafilter", ok)

    ok = all(proj_point(a, i) == proj_point(a, j)
             for a in range(A.natoms) for i in range(n) for j in range(n)
             if A.d(i, j) >> a & 1)
    report.add("diagonal membership merges projections", ok)

    ok = True
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            fd = A.dist_element(i) & A.d(i, j)
            for p in range(m.vertex_count):
                matches = [a for a in iter_bits(fd) if m.atom_value[i][a] == p]
                if len(matches) != 1:
                    ok = False
    report.add("unique distinguishing-diagonal atom per vertex", ok)

    ok = True
    for i in range(n):
        class_of = A.rel.cyl_class_of[i]
        for a in range(A.natoms):
            for b in range(A.natoms):
                same_class = class_of[a] == class_of[b]
                diag_agree = all((A.d(j, k) >> a & 1) == (A.d(j, k) >> b & 1)
                                 for j in range(n) for k in range(n)
                                 if j != i and k != i)
                proj_agree = proj_point(a, i) == proj_point(b, i)
                if same_class != (diag_agree and proj_agree):
                    ok = False
    report.add("cylindric relatedness is diagonal agreement plus equal projection", ok)

    ok = True
    for sigma in all_sigmas(n):
        hit = [set(sigma[k] for k in range(n) if k != i) for i in range(n)]
        table = A.rel.subst_for(sigma)
        for i in range(n):
            missing = [j for j in range(n) if j not in hit[i]]
            if len(missing) != 1:
                continue
            j = missing[0]
            for a in range(A.natoms):
                # ultrafilter substitution takes the generator along the table
                if proj_point(table[a], i) != proj_point(a, j):
                    ok = False
    report.add("substitution permutes projections", ok)
    return report


def _vertex_set_samples(m: AgsModel):
    if m.vertex_count <= 6:
        return range(1 << m.vertex_count)
    rng = random.Random(0)
    return [m.sample_vertex_set(rng) for _ in range(32)]


def check_substitution_properties(m: AgsModel, seed: int = 1, samples: int = 200) -> Report:
    """Substitution identities; concrete items exhaustive over all maps."""
    from .atoms import all_partitions, subst_partition

    rng = random.Random(seed)
    A = m.algebra
    n = m.n
    report = Report("substitutions", {"seed": seed, "samples": samples})
    pool = A.bias_pool()
    sigmas = all_sigmas(n)

    ok = True
    for _ in range(samples):
        x = A.sample_element(rng, pool)
        y = A.sample_element(rng, pool)
        for sigma in sigmas:
            if A.s(sigma, A.neg(x)) != A.neg(A.s(sigma, x)):
                ok = False
            if A.s(sigma, x | y) != A.s(sigma, x) | A.s(sigma, y):
                ok = False
    report.add("substitutions are boolean endomorphisms", ok)

    ok = True
    from .atoms import compose_sigma
    for _ in range(max(1, samples // 20)):
        x = A.sample_element(rng, pool)
        for sigma in sigmas:
            for tau in sigmas:
                if A.s(compose_sigma(sigma, tau), x) != A.s(sigma, A.s(tau, x)):
                    ok = False
    report.add("substitution composes contravariantly", ok)

    ok = all(A.s(sigma, A.d(i, j)) == A.d(sigma[i], sigma[j])
             for sigma in sigmas for i in range(n) for j in range(n))
    report.add("substituted diagonals", ok)

    ok = True
    for sigma in sigmas:
        for sim in all_partitions(n):
            if A.d_partition(sim) & ~A.s(sigma, A.d_partition(subst_partition(sim, sigma))):
                ok = False
    report.add("partition constants grow along substitution", ok)

    ok = True
    for sigma in sigmas:
        for i in range(n):
            image = {sigma[k] for k in range(n) if k != i}
            missing = [j for j in range(n) if j not in image]
            if len(missing) != 1:
                continue
            j = missing[0]
            if A.s(sigma, A.dist_element(i)) != A.dist_element(j):
                ok = False
            for _ in range(max(1, samples // 40)):
                a = A.sample_element(rng, pool)
                if m.proj(j, A.s(sigma, a)) & ~m.proj(i, a):
                    ok = False
    report.add("projection shrinks along substitution", ok)

    ok = True
    for sigma in sigmas:
        for _ in range(max(1, samples // 20)):
            a = A.sample_element(rng, pool)
            for i in range(n):
                if i not in sigma and A.c(i, A.s(sigma, a)) != A.s(sigma, a):
                    ok = False
            if len(set(sigma)) == n:
                for i in range(n):
                    if A.c(sigma[i], A.s(sigma, a)) != A.s(sigma, A.c(i, a)):
                        ok = False
    report.add("cylindrifications move through substitution", ok)
    return report


def run_suite(m: AgsModel, which: str = "all", seed: int = 1, samples: int = 300) -> Report:
    report = Report(f"ags-suite-{which}", {"seed": seed, "samples": samples})
    if which in ("rs", "all"):
        report.extend(check_block_structure(m))
        report.extend(check_rs_properties(m, seed, samples))
    if which in ("proj", "all"):
        report.extend(check_projection_properties(m, seed))
    if which in ("subst", "all"):
        report.extend(check_substitution_properties(m, seed, samples))
    return report

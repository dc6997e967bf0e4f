"""Lifting graph p-morphisms to atom structures and dualizing to algebras.

A surjective graph p-morphism induces a map on atoms (compose the value
vector through the per-copy extension of the vertex map), which is a
surjective p-morphism of atom structures.  Its dual embeds the target's
complex algebra into the source's by taking preimages, and the dual of an
embedding maps principal ultrafilters back along it.  Chains of such maps
are checked stage by stage; no limit object is ever materialized.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .atoms import (Atom, AtomStructure, all_sigmas, atom_is_valid, enumerate_atoms,
                    DEFAULT_ATOM_BOUND)
from .bao import FiniteBao, complex_algebra
from .bitset import iter_bits
from .graph import (Graph, VertexMap, chromatic_number, compose_maps, graph_from_json,
                    is_p_morphism, is_surjective)
from .report import Report


@dataclass
class AtomPMorphism:
    source: AtomStructure
    target: AtomStructure
    mapping: tuple[int, ...]

    def __call__(self, atom_index: int) -> int:
        return self.mapping[atom_index]


@dataclass
class GraphChain:
    """Stages with one surjective p-morphism from each stage to the previous."""

    stages: list[Graph]
    steps: list[VertexMap]

    def __post_init__(self):
        if len(self.steps) != len(self.stages) - 1:
            raise ValueError("need exactly one step between consecutive stages")
        for s, step in enumerate(self.steps):
            if step.source is not self.stages[s + 1] or step.target is not self.stages[s]:
                if (step.source.adj != self.stages[s + 1].adj
                        or step.target.adj != self.stages[s].adj):
                    raise ValueError(f"step {s} does not connect stages {s + 1} -> {s}")


def extend_to_copies(f: VertexMap, n: int):
    """Vertex map on the inflated graphs: (x, i) goes to (f(x), i)."""
    src = f.source.vertex_count
    tgt = f.target.vertex_count

    def mapped(v: int) -> int:
        copy, x = divmod(v, src)
        return copy * tgt + f.mapping[x]

    return mapped


def lift(f: VertexMap, n: int, max_atoms: int = DEFAULT_ATOM_BOUND,
         source_structure: AtomStructure | None = None,
         target_structure: AtomStructure | None = None) -> AtomPMorphism:
    """Atom-structure map induced by a surjective graph p-morphism."""
    if not is_p_morphism(f):
        raise ValueError("map is not a graph p-morphism")
    if not is_surjective(f):
        raise ValueError("map is not surjective")
    source = source_structure or enumerate_atoms(f.source, n, max_atoms)
    target = target_structure or enumerate_atoms(f.target, n, max_atoms)
    mapped = extend_to_copies(f, n)
    images = []
    for atom in source.atoms:
        new_k = tuple(None if v is None else mapped(v) for v in atom.k)
        image = Atom(new_k, atom.sim)
        if not atom_is_valid(image, target.inflated):
            raise RuntimeError(f"lift produced an invalid atom from {atom}")
        images.append(target.index_of(image))
    return AtomPMorphism(source, target, tuple(images))


def validate_atom_pmorphism(g: AtomPMorphism, check_surjective: bool = True) -> Report:
    """Exhaustive forth/back verification over all atoms and relations."""
    report = Report("atom-p-morphism")
    src, tgt = g.source, g.target
    n = src.n

    ok = all((src.atoms[a].sim[i] == src.atoms[a].sim[j])
             == (tgt.atoms[g(a)].sim[i] == tgt.atoms[g(a)].sim[j])
             for a in range(len(src)) for i in range(n) for j in range(n))
    report.add("diagonal membership preserved and reflected", ok)

    srel, trel = src.tables(), tgt.tables()
    forth = True
    back = True
    for i in range(n):
        sclass, tclass = srel.cyl_class_of[i], trel.cyl_class_of[i]
        image_class: dict[int, int] = {}
        covered: dict[int, set] = {}
        for a in range(len(src)):
            cid = sclass[a]
            tid = tclass[g(a)]
            if image_class.setdefault(cid, tid) != tid:
                forth = False
            covered.setdefault(cid, set()).add(g(a))
        for cid, tid in image_class.items():
            members = set(iter_bits(trel.cyl_class_masks[i][tid]))
            if covered[cid] != members:
                back = False
    report.add("cylindric forth", forth)
    report.add("cylindric back", back)

    subst_ok = True
    for rank, _sigma in enumerate(all_sigmas(n)):
        s_table = srel.subst_tables[rank]
        t_table = trel.subst_tables[rank]
        for a in range(len(src)):
            if g(s_table[a]) != t_table[g(a)]:
                subst_ok = False
    report.add("substitution equivariance (forth)", subst_ok)
    # the back condition for the functional substitution relation asks for a
    # preimage of the computed image, which equivariance supplies directly
    report.add("substitution back", subst_ok)

    if check_surjective:
        report.add("surjective on atoms", len(set(g.mapping)) == len(tgt))
    return report


@dataclass
class AlgebraEmbedding:
    """Preimage map dual to an atom p-morphism: target algebra into source algebra."""

    domain: FiniteBao      # complex algebra of the p-morphism's target
    codomain: FiniteBao    # complex algebra of the p-morphism's source
    preimage_masks: tuple[int, ...]

    def __call__(self, element: int) -> int:
        out = 0
        for atom in iter_bits(element):
            out |= self.preimage_masks[atom]
        return out


def dual_embedding(g: AtomPMorphism) -> AlgebraEmbedding:
    masks = [0] * len(g.target)
    for a, image in enumerate(g.mapping):
        masks[image] |= 1 << a
    return AlgebraEmbedding(complex_algebra(g.target), complex_algebra(g.source),
                            tuple(masks))


def validate_embedding(emb: AlgebraEmbedding, seed: int = 1, samples: int = 1000) -> Report:
    """Injectivity exhaustively on atoms; homomorphism sampled plus exact
    images of every operator applied to constants."""
    rng = random.Random(seed)
    dom, cod = emb.domain, emb.codomain
    report = Report("algebra-embedding", {"seed": seed, "samples": samples})

    nonempty = all(mask != 0 for mask in emb.preimage_masks)
    union = 0
    disjoint = True
    for mask in emb.preimage_masks:
        if union & mask:
            disjoint = False
        union |= mask
    report.add("atom preimages nonempty and disjoint", nonempty and disjoint
               and union == cod.top)

    report.add("unit and zero preserved", emb(dom.top) == cod.top and emb(0) == 0)
    consts = all(emb(dom.d(i, j)) == cod.d(i, j)
                 for i in range(dom.n) for j in range(dom.n))
    report.add("diagonal constants preserved", consts)

    pool = dom.bias_pool()
    ok_bool = ok_cyl = ok_sub = True
    sigmas = all_sigmas(dom.n)
    for _ in range(samples):
        x = dom.sample_element(rng, pool)
        y = dom.sample_element(rng, pool)
        if emb(x | y) != emb(x) | emb(y) or emb(dom.neg(x)) != cod.neg(emb(x)):
            ok_bool = False
        for i in range(dom.n):
            if emb(dom.c(i, x)) != cod.c(i, emb(x)):
                ok_cyl = False
        sigma = sigmas[rng.randrange(len(sigmas))]
        if emb(dom.s(sigma, x)) != cod.s(sigma, emb(x)):
            ok_sub = False
    report.add("boolean operations preserved (sampled)", ok_bool)
    report.add("cylindrifications preserved (sampled)", ok_cyl)
    report.add("substitutions preserved (sampled)", ok_sub)
    return report


def dual_surjection(emb: AlgebraEmbedding) -> AtomPMorphism:
    """Ultrafilter map dual to an embedding, on principal ultrafilters.

    Each atom of the codomain sits inside the image of exactly one atom of
    the domain; that atom is its image.
    """
    cod_atoms = emb.codomain.natoms
    mapping = [-1] * cod_atoms
    for dom_atom, mask in enumerate(emb.preimage_masks):
        for a in iter_bits(mask):
            if mapping[a] >= 0:
                raise ValueError("embedding image masks overlap")
            mapping[a] = dom_atom
    if any(v < 0 for v in mapping):
        raise ValueError("embedding image masks do not cover")
    source = emb.codomain.atom_structure
    target = emb.domain.atom_structure
    if source is None or target is None:
        raise ValueError("dual surjection needs atom-structure provenance")
    return AtomPMorphism(source, target, tuple(mapping))


def check_chain(chain: GraphChain, n: int, seed: int = 1, samples: int = 300,
                max_atoms: int = DEFAULT_ATOM_BOUND) -> Report:
    """Stage-by-stage certificates for a chain of surjective p-morphisms."""
    report = Report("graph-chain", {"n": n, "seed": seed})
    structures = [enumerate_atoms(g, n, max_atoms) for g in chain.stages]

    for s, g in enumerate(chain.stages):
        chi, _ = chromatic_number(g)
        report.add(f"stage {s}: chromatic number", True, {"chi": chi})
        algebra = complex_algebra(structures[s])
        recovered = algebra.ultrafilter_structure()
        report.add(f"stage {s}: ultrafilter structure matches the atom structure",
                   recovered.same_structure(structures[s].tables()))

    lifts = []
    for s, step in enumerate(chain.steps):
        ok_p = is_p_morphism(step) and is_surjective(step)
        report.add(f"step {s}: surjective graph p-morphism", ok_p)
        lifted = lift(step, n, max_atoms,
                      source_structure=structures[s + 1],
                      target_structure=structures[s])
        lifts.append(lifted)
        sub = validate_atom_pmorphism(lifted)
        report.add(f"step {s}: lifted map is a p-morphism of atom structures", sub.ok)
        emb = dual_embedding(lifted)
        emb_report = validate_embedding(emb, seed, samples)
        report.add(f"step {s}: dual map embeds the smaller algebra", emb_report.ok)
        back = dual_surjection(emb)
        report.add(f"step {s}: dual of the dual returns the lifted map",
                   back.mapping == lifted.mapping)

    for s in range(len(chain.steps) - 1):
        composed = compose_maps(chain.steps[s], chain.steps[s + 1])
        direct = lift(composed, n, max_atoms,
                      source_structure=structures[s + 2],
                      target_structure=structures[s])
        via = tuple(lifts[s].mapping[a] for a in lifts[s + 1].mapping)
        report.add(f"steps {s + 2}->{s}: lifts compose", direct.mapping == via)
    return report


def chain_from_json(data: dict) -> GraphChain:
    stages = [graph_from_json(g) for g in data["stages"]]
    steps = []
    for s, mapping in enumerate(data["steps"]):
        steps.append(VertexMap(stages[s + 1], stages[s], tuple(mapping)))
    return GraphChain(stages, steps)


def chain_to_json(chain: GraphChain) -> dict:
    from .graph import graph_to_json

    return {"stages": [graph_to_json(g) for g in chain.stages],
            "steps": [list(step.mapping) for step in chain.steps]}


def identity_pmorphism(structure: AtomStructure) -> AtomPMorphism:
    return AtomPMorphism(structure, structure, tuple(range(len(structure))))


def functoriality_spot_check(f: VertexMap, g: VertexMap, n: int,
                             max_atoms: int = DEFAULT_ATOM_BOUND) -> bool:
    """lift(f after g) equals lift(f) after lift(g), pointwise on atoms."""
    composed = lift(compose_maps(f, g), n, max_atoms)
    lf = lift(f, n, max_atoms)
    lg = lift(g, n, max_atoms,
              source_structure=composed.source, target_structure=lf.source)
    return composed.mapping == tuple(lf.mapping[a] for a in lg.mapping)

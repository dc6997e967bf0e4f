"""Ultrafilter networks, patch systems, and the bounded representability game.

Ultrafilters of the finite algebra are principal, so a network labels each
n-tuple of nodes with an atom index, and a patch system assigns a vertex of
the inflated graph to each (n-1)-subset of nodes.  The game is a bounded
finite shadow of representation building: truncated at a fixed depth, it
reports 'unknown' when a resource bound trips and never claims anything
about the untruncated game.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .ags import AgsModel
from .atoms import Atom, all_sigmas, canonical_partition, is_i_distinguishing
from .bitset import iter_bits
from .errors import IncoherentPatchError


class NoAtomError(ValueError):
    """No atom realizes the requested diagonal pattern and projections."""


@dataclass
class UfNetwork:
    n: int
    nodes: tuple[int, ...]
    labels: dict[tuple[int, ...], int]

    def key(self):
        return tuple(sorted(self.labels.items()))


@dataclass
class PatchSystem:
    nodes: tuple[int, ...]
    assign: dict[frozenset, int]

    def is_total(self, n: int) -> bool:
        return all(frozenset(c) in self.assign
                   for c in itertools.combinations(self.nodes, n - 1))


@dataclass(frozen=True)
class GameMove:
    v: tuple[int, ...]
    i: int
    atom: int


@dataclass
class GameState:
    round: int
    network: UfNetwork
    history: list = field(default_factory=list)


@dataclass
class GameVerdict:
    status: str                # survives | loses | unknown | precondition_failed
    depth: int
    trace: list | None = None
    visited: int = 0
    round_failed: int = -1
    reason: str = ""


# basic network machinery -----------------------------------------------------

def initial_network(m: AgsModel) -> UfNetwork:
    """One node; the constant tuple carries the single-block empty atom."""
    bottom = m.structure.index_of(Atom((None,) * m.n, (0,) * m.n))
    return UfNetwork(m.n, (0,), {(0,) * m.n: bottom})


def tuple_pattern(t: tuple[int, ...]) -> tuple[int, ...]:
    return canonical_partition(t)


def atoms_by_pattern(m: AgsModel) -> dict[tuple[int, ...], list[int]]:
    cache = getattr(m, "_atoms_by_pattern", None)
    if cache is None:
        cache = {}
        for idx, atom in enumerate(m.structure.atoms):
            cache.setdefault(atom.sim, []).append(idx)
        m._atoms_by_pattern = cache
    return cache


def validate_network(net: UfNetwork, m: AgsModel, mode: str = "polyadic") -> list[dict]:
    """Exhaustive check of the diagonal, cylindric and (optionally) polyadic
    conditions; returns the list of violations."""
    violations = []
    n = net.n
    atoms = m.structure.atoms
    rel = m.algebra.rel
    tuples = list(itertools.product(net.nodes, repeat=n))
    for v in tuples:
        if v not in net.labels:
            violations.append({"kind": "missing-label", "tuple": v})
            return violations
    for v in tuples:
        sim = atoms[net.labels[v]].sim
        for i in range(n):
            for j in range(n):
                if (sim[i] == sim[j]) != (v[i] == v[j]):
                    violations.append({"kind": "diagonal", "tuple": v, "i": i, "j": j})
    for v in tuples:
        lab = net.labels[v]
        for i in range(n):
            for node in net.nodes:
                w = v[:i] + (node,) + v[i + 1:]
                if w == v:
                    continue
                if rel.cyl_class_of[i][lab] != rel.cyl_class_of[i][net.labels[w]]:
                    violations.append({"kind": "cylindric", "tuple": v, "i": i,
                                       "other": w})
    if mode == "polyadic":
        for v in tuples:
            lab = net.labels[v]
            for rank, sigma in enumerate(all_sigmas(n)):
                w = tuple(v[sigma[k]] for k in range(n))
                if net.labels[w] != rel.subst_tables[rank][lab]:
                    violations.append({"kind": "polyadic", "tuple": v,
                                       "sigma": sigma})
    return violations


def projection_point(m: AgsModel, atom: int, i: int) -> int | None:
    """Generating vertex of the i-projection, or None for the improper filter."""
    if m.algebra.dist_element(i) >> atom & 1:
        return m.atom_value[i][atom]
    return None


def boundary(net: UfNetwork, m: AgsModel) -> PatchSystem:
    """Patch system reading off the projections of distinguishing tuples.

    Well-definedness (independence of the witness tuple and coordinate) is
    asserted during construction; a violation is an internal error.
    """
    n = net.n
    assign: dict[frozenset, int] = {}
    for v in itertools.product(net.nodes, repeat=n):
        for i in range(n):
            if not is_i_distinguishing(tuple_pattern(v), i):
                continue
            others = frozenset(v[k] for k in range(n) if k != i)
            point = projection_point(m, net.labels[v], i)
            if point is None:
                raise RuntimeError("distinguishing tuple with improper projection")
            if others in assign and assign[others] != point:
                raise RuntimeError(
                    f"patch value at {sorted(others)} depends on the witness tuple")
            assign[others] = point
    return PatchSystem(net.nodes, assign)


# coherence --------------------------------------------------------------------

def is_coherent(p: PatchSystem, v_set, m: AgsModel) -> bool:
    """With principal ultrafilters, an n-subset is coherent exactly when the
    assigned points are not an independent set."""
    nodes = sorted(v_set)
    points = [p.assign[frozenset(nodes) - {x}] for x in nodes]
    distinct = sorted(set(points))
    return any(m.graph.has_edge(a, b)
               for ix, a in enumerate(distinct) for b in distinct[ix + 1:])


def coherent_via_atom_search(p: PatchSystem, v_set, m: AgsModel) -> bool:
    """Cross-check: does an atom exist that is distinguishing at every
    coordinate with projections matching the patches?"""
    nodes = sorted(v_set)
    n = m.n
    points = [p.assign[frozenset(nodes) - {x}] for x in nodes]
    for idx in range(m.algebra.natoms):
        if all(projection_point(m, idx, i) == points[i] for i in range(n)):
            return True
    return False


def patch_system_coherent(p: PatchSystem, m: AgsModel) -> bool:
    return all(is_coherent(p, combo, m)
               for combo in itertools.combinations(p.nodes, m.n))


def ultrafilter_for_tuple(p: PatchSystem, v: tuple[int, ...], m: AgsModel) -> int:
    """Atom whose diagonal pattern matches v and whose projections follow p.

    Three cases on the number of distinct entries: all distinct (needs the
    relevant n-subset coherent), one repeat (the unique pair atom at the
    assigned point), more collapsing (the empty atom of that pattern).
    """
    n = m.n
    image = set(v)
    sim = tuple_pattern(v)
    if len(image) == n:
        points = tuple(p.assign[frozenset(image) - {v[i]}] for i in range(n))
        atom = Atom(points, sim)
        if not m.structure.contains(atom):
            raise NoAtomError(f"patches at {sorted(image)} are independent")
        return m.structure.index_of(atom)
    if len(image) == n - 1:
        point = p.assign[frozenset(image)]
        k: list[int | None] = [None] * n
        for i in range(n):
            if is_i_distinguishing(sim, i):
                k[i] = point
        return m.structure.index_of(Atom(tuple(k), sim))
    return m.structure.index_of(Atom((None,) * n, sim))


def network_from_patch(p: PatchSystem, m: AgsModel, rep_choice: str = "lex",
                       seed: int = 0, preferred: list | None = None) -> UfNetwork:
    """Label every tuple from a coherent patch system.

    Non-injective tuples get their unique pattern-matching atom; injective
    tuples are labeled on one representative per permutation orbit and
    propagated through the substitution action.
    """
    import random

    n = m.n
    if not p.is_total(n):
        raise ValueError("patch system must be total on (n-1)-subsets")
    rng = random.Random(seed)
    labels: dict[tuple[int, ...], int] = {}
    injective: dict[frozenset, list[tuple[int, ...]]] = {}
    for v in itertools.product(p.nodes, repeat=n):
        if len(set(v)) == n:
            injective.setdefault(frozenset(v), []).append(v)
        else:
            try:
                labels[v] = ultrafilter_for_tuple(p, v, m)
            except NoAtomError as exc:
                raise IncoherentPatchError(str(exc)) from exc
    preferred = preferred or []
    for image, orbit in injective.items():
        orbit.sort()
        rep = orbit[0] if rep_choice == "lex" else rng.choice(orbit)
        for cand in preferred:
            if cand in orbit:
                rep = cand
        try:
            rep_label = ultrafilter_for_tuple(p, rep, m)
        except NoAtomError as exc:
            raise IncoherentPatchError(str(exc)) from exc
        position = {node: idx for idx, node in enumerate(rep)}
        for u in orbit:
            sigma = tuple(position[u[i]] for i in range(n))
            labels[u] = m.algebra.rel.subst_for(sigma)[rep_label]
    net = UfNetwork(n, tuple(sorted(p.nodes)), labels)
    bad = validate_network(net, m, "polyadic")
    if bad:
        raise RuntimeError(f"patch labeling produced an invalid network: {bad[0]}")
    return net


# the game ---------------------------------------------------------------------

def forall_moves(m: AgsModel, net: UfNetwork, atoms_only: bool = True) -> list[GameMove]:
    """Challenger moves (v, i, a) with the current label below c_i(a).

    With principal ultrafilters and a an atom, that means a lies in the
    cylindric class of the current label.  Atom moves are the hard cases
    since cylindrifications are completely additive; element moves beyond
    atoms sit behind the flag.
    """
    rel = m.algebra.rel
    out = []
    for v in sorted(net.labels):
        lab = net.labels[v]
        for i in range(m.n):
            cls = rel.cyl_class_masks[i][rel.cyl_class_of[i][lab]]
            for a in iter_bits(cls):
                out.append(GameMove(v, i, a))
            if not atoms_only:
                if m.algebra.natoms > 12:
                    raise ValueError("full-element moves only on tiny algebras")
                for x in range(1, 1 << m.algebra.natoms):
                    if x & cls and not (x & (x - 1) == 0):
                        out.append(GameMove(v, i, x))
    return out


def _witness_tuples(net: UfNetwork, move: GameMove):
    v, i = move.v, move.i
    for node in net.nodes:
        yield v[:i] + (node,) + v[i + 1:]


def exists_responses(m: AgsModel, net: UfNetwork, move: GameMove):
    """All legal responses: the unchanged network when a witness tuple already
    carries the demanded atom, then every one-fresh-node extension."""
    for w in _witness_tuples(net, move):
        if net.labels[w] == move.atom:
            yield net
            break
    yield from _extension_networks(m, net, move)


def _extension_networks(m: AgsModel, net: UfNetwork, move: GameMove):
    n = m.n
    v, i, a = move.v, move.i, move.atom
    z = max(net.nodes) + 1
    nodes2 = net.nodes + (z,)
    w0 = v[:i] + (z,) + v[i + 1:]
    # the demand must be witnessed by an old tuple or by the fresh one
    need_w0 = not any(net.labels[w] == a for w in _witness_tuples(net, move))
    if need_w0 and m.structure.atoms[a].sim != tuple_pattern(w0):
        return
    sigmas = all_sigmas(n)
    rel = m.algebra.rel
    by_pattern = atoms_by_pattern(m)

    all_tuples = list(itertools.product(nodes2, repeat=n))
    new_tuples = [t for t in all_tuples if z in t]
    order = [w0] + sorted(t for t in new_tuples if t != w0)
    out_links: dict[tuple, list] = {t: [] for t in new_tuples}
    in_links: dict[tuple, list] = {t: [] for t in new_tuples}
    for t in all_tuples:
        for rank, sigma in enumerate(sigmas):
            u = tuple(t[sigma[k]] for k in range(n))
            if z in t:
                out_links[t].append((rank, u))
                if z in u and u != t:
                    in_links[u].append((t, rank))

    assigned = dict(net.labels)

    def candidates(t):
        if t == w0 and need_w0:
            pool = [a]
        else:
            pool = by_pattern.get(tuple_pattern(t), [])
        for cand in pool:
            ok = True
            for i2 in range(n):
                cls = rel.cyl_class_of[i2]
                for node in nodes2:
                    t2 = t[:i2] + (node,) + t[i2 + 1:]
                    if t2 == t or t2 not in assigned:
                        continue
                    if cls[cand] != cls[assigned[t2]]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                for rank, u in out_links[t]:
                    target = cand if u == t else assigned.get(u)
                    if target is not None and rel.subst_tables[rank][cand] != target:
                        ok = False
                        break
            if ok:
                for u, rank in in_links[t]:
                    if u in assigned and rel.subst_tables[rank][assigned[u]] != cand:
                        ok = False
                        break
            if ok:
                yield cand

    def assign(pos):
        if pos == len(order):
            net2 = UfNetwork(n, nodes2, dict(assigned))
            bad = validate_network(net2, m, "polyadic")
            if bad:
                raise RuntimeError(f"search produced an invalid network: {bad[0]}")
            yield net2
            return
        t = order[pos]
        for cand in candidates(t):
            assigned[t] = cand
            yield from assign(pos + 1)
            del assigned[t]

    yield from assign(0)


class _BudgetExceeded(Exception):
    pass


class _PreconditionFailed(Exception):
    def __init__(self, round_no: int, reason: str):
        super().__init__(reason)
        self.round_no = round_no
        self.reason = reason


def exists_survives(m: AgsModel, depth: int, strategy: str = "exhaustive",
                    max_visits: int = 500000, collect: list | None = None,
                    atoms_only: bool = True) -> GameVerdict:
    """Bounded verdict for the builder player.

    exhaustive: ground truth at the given depth by backtracking over all
    challenger moves and all single-node responses.  paper: follow the
    two-step ultrafilter/patch construction; on finite models its second
    step eventually demands an ultrafilter of the set sort free of
    independent sets, which no principal ultrafilter is, and that failure
    is reported rather than masked.
    """
    net0 = initial_network(m)
    if collect is not None:
        collect.append(net0)
    if strategy == "paper":
        return _paper_verdict(m, net0, depth, collect)
    if strategy != "exhaustive":
        raise ValueError(f"unknown strategy {strategy!r}")

    memo: dict = {}
    visited = 0

    def survives(net, d):
        nonlocal visited
        if d == 0:
            return True, None
        key = (net.key(), d)
        if key in memo:
            return memo[key]
        visited += 1
        if visited > max_visits:
            raise _BudgetExceeded()
        result = (True, None)
        for move in forall_moves(m, net, atoms_only):
            found = False
            for resp in exists_responses(m, net, move):
                if collect is not None and resp is not net:
                    collect.append(resp)
                if survives(resp, d - 1)[0]:
                    found = True
                    break
            if not found:
                result = (False, [{"v": list(move.v), "i": move.i, "atom": move.atom}])
                break
        memo[key] = result
        return result

    try:
        ok, trace = survives(net0, depth)
    except _BudgetExceeded:
        return GameVerdict("unknown", depth, None, visited)
    return GameVerdict("survives" if ok else "loses", depth, trace, visited)


def paper_response(m: AgsModel, net: UfNetwork, move: GameMove,
                   round_no: int = 0) -> UfNetwork:
    """One round of the constructed strategy.

    Reuse an existing witness tuple when possible; otherwise add one node,
    give the new witness tuple the demanded atom, and extend the boundary
    patch system.  Any (n-1)-subset left unpatched would need an ultrafilter
    of the set sort containing a copy block but no independent set, which
    does not exist over a finite graph; that raises the precondition failure.
    """
    n = m.n
    v, i, a = move.v, move.i, move.atom
    for w in _witness_tuples(net, move):
        if net.labels[w] == a:
            return net
    sim_a = m.structure.atoms[a].sim
    assert all(sim_a[i] != sim_a[j] for j in range(n) if j != i), \
        "a collapsed demand always has an existing witness tuple"
    z = max(net.nodes) + 1
    nodes2 = net.nodes + (z,)
    w0 = v[:i] + (z,) + v[i + 1:]
    assign = dict(boundary(net, m).assign)
    for j in range(n):
        others = frozenset(w0[k] for k in range(n) if k != j)
        if len(others) != n - 1:
            continue
        point = projection_point(m, a, j)
        assert point is not None
        if others in assign:
            assert assign[others] == point, "patch disagrees with the old boundary"
        else:
            assign[others] = point
    remaining = [c for c in itertools.combinations(nodes2, n - 1)
                 if frozenset(c) not in assign]
    if remaining:
        raise _PreconditionFailed(
            round_no,
            "no ultrafilter of the set sort avoids independent sets over a "
            f"finite graph; unpatched subsets: {sorted(map(sorted, remaining))}")
    net2 = network_from_patch(PatchSystem(nodes2, assign), m, preferred=[w0])
    assert net2.labels[w0] == a
    for t, lab in net.labels.items():
        assert net2.labels[t] == lab, "extension must preserve old labels"
    return net2


def _paper_verdict(m: AgsModel, net0: UfNetwork, depth: int,
                   collect: list | None) -> GameVerdict:
    def walk(net, d, round_no):
        if d == 0:
            return None
        for move in forall_moves(m, net):
            net2 = paper_response(m, net, move, round_no)
            if collect is not None and net2 is not net:
                collect.append(net2)
            deeper = walk(net2, d - 1, round_no + 1)
            if deeper is not None:
                return deeper
        return None

    try:
        walk(net0, depth, 0)
    except _PreconditionFailed as exc:
        return GameVerdict("precondition_failed", depth, None,
                           round_failed=exc.round_no, reason=exc.reason)
    return GameVerdict("survives", depth)


def sample_play(m: AgsModel, rounds: int, strategy: str = "exhaustive") -> list[GameState]:
    """One concrete play for trace output: the challenger takes the first
    move each round and the builder answers with her first good response."""
    net = initial_network(m)
    states = [GameState(0, net)]
    for r in range(rounds):
        moves = forall_moves(m, net)
        if not moves:
            break
        # prefer a challenge no existing tuple witnesses, so the play grows
        move = next((mv for mv in moves
                     if all(net.labels[w] != mv.atom
                            for w in _witness_tuples(net, mv))), moves[0])
        if strategy == "paper":
            net2 = paper_response(m, net, move, r)
        else:
            net2 = next(iter(exists_responses(m, net, move)), None)
            if net2 is None:
                break
        states.append(GameState(r + 1, net2,
                                [{"v": list(move.v), "i": move.i, "atom": move.atom}]))
        net = net2
    return states


def network_to_json(net: UfNetwork) -> dict:
    return {
        "n": net.n,
        "nodes": list(net.nodes),
        "labels": {",".join(map(str, k)): v for k, v in sorted(net.labels.items())},
    }


def network_from_json(data: dict, n: int) -> UfNetwork:
    labels = {}
    for key, value in data["labels"].items():
        t = tuple(int(part) for part in key.split(","))
        if len(t) != n:
            raise ValueError(f"label key {key!r} has wrong arity")
        labels[t] = int(value)
    return UfNetwork(n, tuple(data["nodes"]), labels)

import itertools

import pytest

from graphbao import ags, networks
from graphbao.atoms import Atom
from graphbao.errors import IncoherentPatchError
from graphbao.graph import cycle_graph
from graphbao.networks import (GameMove, PatchSystem, UfNetwork, boundary,
                               coherent_via_atom_search, exists_responses,
                               exists_survives, forall_moves, initial_network,
                               is_coherent, network_from_json, network_from_patch,
                               network_to_json, paper_response,
                               patch_system_coherent, sample_play,
                               ultrafilter_for_tuple, validate_network)
from oracles import naive_game_moves, naive_game_responses, naive_survives


class TestValidate:
    def test_initial_network_valid(self, k1_model):
        net = initial_network(k1_model)
        label = k1_model.structure.atoms[net.labels[(0, 0, 0)]]
        assert label == Atom((None, None, None), (0, 0, 0))
        assert validate_network(net, k1_model, "polyadic") == []
        assert validate_network(net, k1_model, "cylindric") == []

    def test_diagonal_violation_detected(self, k1_model):
        # a non-collapsed label on a constant tuple
        pair = k1_model.structure.index_of(Atom((0, 0, None), (0, 0, 1)))
        net = UfNetwork(3, (0,), {(0, 0, 0): pair})
        kinds = {v["kind"] for v in validate_network(net, k1_model, "cylindric")}
        assert "diagonal" in kinds

    def test_engine_networks_replay_valid(self, k1_model):
        collected = []
        exists_survives(k1_model, 1, collect=collected)
        assert collected
        for net in collected:
            assert validate_network(net, k1_model, "polyadic") == []


class TestBoundary:
    def test_single_assignment_on_two_nodes(self, k1_model):
        collected = []
        exists_survives(k1_model, 1, collect=collected)
        two_node = next(net for net in collected if len(net.nodes) == 2)
        patch = boundary(two_node, k1_model)
        assert set(patch.assign) == {frozenset(two_node.nodes)}

    def test_well_definedness_across_witnesses(self, k1_model):
        collected = []
        exists_survives(k1_model, 1, collect=collected)
        for net in collected:
            patch = boundary(net, k1_model)
            for v in itertools.product(net.nodes, repeat=3):
                for i in range(3):
                    others = [v[k] for k in range(3) if k != i]
                    if len(set(others)) != 2:
                        continue
                    point = networks.projection_point(k1_model, net.labels[v], i)
                    if point is not None:
                        assert patch.assign[frozenset(others)] == point

    def test_boundary_of_initial_is_empty(self, k1_model):
        patch = boundary(initial_network(k1_model), k1_model)
        assert patch.assign == {}


class TestCoherence:
    def patch(self, points):
        nodes = (0, 1, 2)
        subsets = list(itertools.combinations(nodes, 2))
        return PatchSystem(nodes, {frozenset(s): p for s, p in zip(subsets, points)})

    def test_constant_assignment_incoherent(self, k1_model):
        p = self.patch((1, 1, 1))
        assert not is_coherent(p, (0, 1, 2), k1_model)

    def test_two_adjacent_points_coherent(self, k1_model):
        p = self.patch((0, 1, 0))
        assert is_coherent(p, (0, 1, 2), k1_model)

    def test_characterization_exhaustive(self, k1_model):
        for points in itertools.product(range(3), repeat=3):
            p = self.patch(points)
            assert is_coherent(p, (0, 1, 2), k1_model) == \
                coherent_via_atom_search(p, (0, 1, 2), k1_model)

    def test_patch_system_coherent_all_subsets(self, k1_model):
        assert patch_system_coherent(self.patch((0, 1, 2)), k1_model)


class TestUltrafilterForTuple:
    def patch(self, k1_model, points):
        nodes = (0, 1, 2)
        subsets = list(itertools.combinations(nodes, 2))
        return PatchSystem(nodes, {frozenset(s): p for s, p in zip(subsets, points)})

    def test_constant_tuple_gets_bottom(self, k1_model):
        p = self.patch(k1_model, (0, 1, 2))
        idx = ultrafilter_for_tuple(p, (1, 1, 1), k1_model)
        assert k1_model.structure.atoms[idx] == Atom((None, None, None), (0, 0, 0))

    def test_one_repeat_gets_unique_pair_atom(self, k1_model):
        p = self.patch(k1_model, (0, 1, 2))
        idx = ultrafilter_for_tuple(p, (0, 1, 1), k1_model)
        atom = k1_model.structure.atoms[idx]
        # pair block {1, 2}; the assigned point is the patch at {0, 1}
        assert atom.sim == (0, 1, 1)
        assert atom.k[1] == atom.k[2] == p.assign[frozenset((0, 1))]

    def test_injective_tuple_distinguishing_everywhere(self, k1_model):
        p = self.patch(k1_model, (0, 1, 2))
        idx = ultrafilter_for_tuple(p, (0, 1, 2), k1_model)
        atom = k1_model.structure.atoms[idx]
        assert atom.sim == (0, 1, 2)
        assert all(v is not None for v in atom.k)

    def test_incoherent_injective_raises(self, k1_model):
        p = self.patch(k1_model, (2, 2, 2))
        with pytest.raises(networks.NoAtomError):
            ultrafilter_for_tuple(p, (0, 1, 2), k1_model)

    def test_diagonal_pattern_always_matches(self, k1_model):
        p = self.patch(k1_model, (0, 1, 2))
        for v in itertools.product((0, 1, 2), repeat=3):
            if len(set(v)) == 3 and not is_coherent(p, tuple(set(v)), k1_model):
                continue
            idx = ultrafilter_for_tuple(p, v, k1_model)
            sim = k1_model.structure.atoms[idx].sim
            for i in range(3):
                for j in range(3):
                    assert (sim[i] == sim[j]) == (v[i] == v[j])


class TestNetworkFromPatch:
    def test_two_nodes_all_noninjective(self, k1_model):
        nodes = (0, 1)
        p = PatchSystem(nodes, {frozenset(nodes): 2})
        net = network_from_patch(p, k1_model)
        assert validate_network(net, k1_model, "polyadic") == []
        assert all(len(set(t)) < 3 for t in net.labels)

    def test_three_nodes_polyadic_valid(self, k1_model):
        nodes = (0, 1, 2)
        subsets = list(itertools.combinations(nodes, 2))
        p = PatchSystem(nodes, {frozenset(s): i for i, s in enumerate(subsets)})
        net = network_from_patch(p, k1_model)
        assert validate_network(net, k1_model, "polyadic") == []

    def test_rep_choice_does_not_change_validity(self, k1_model):
        nodes = (0, 1, 2)
        subsets = list(itertools.combinations(nodes, 2))
        p = PatchSystem(nodes, {frozenset(s): i for i, s in enumerate(subsets)})
        for seed in (3, 4):
            net = network_from_patch(p, k1_model, rep_choice="random", seed=seed)
            assert validate_network(net, k1_model, "polyadic") == []

    def test_incoherent_patch_rejected(self, k1_model):
        nodes = (0, 1, 2)
        subsets = list(itertools.combinations(nodes, 2))
        p = PatchSystem(nodes, {frozenset(s): 0 for s in subsets})
        with pytest.raises(IncoherentPatchError):
            network_from_patch(p, k1_model)


class TestForallMoves:
    def test_nonempty_and_deterministic(self, k1_model):
        net = initial_network(k1_model)
        moves = forall_moves(k1_model, net)
        assert moves
        assert moves == forall_moves(k1_model, net)

    def test_self_move_present(self, k1_model):
        net = initial_network(k1_model)
        lab = net.labels[(0, 0, 0)]
        moves = forall_moves(k1_model, net)
        for i in range(3):
            assert GameMove((0, 0, 0), i, lab) in moves

    def test_matches_naive_move_oracle(self, k1_model):
        net = initial_network(k1_model)
        engine = {(mv.v, mv.i, mv.atom) for mv in forall_moves(k1_model, net)}
        assert engine == set(naive_game_moves(k1_model, net))

    def test_full_element_moves_guarded(self, k1_model):
        # beyond-atom challenges are flagged and only enumerable on algebras
        # far smaller than any graph produces
        with pytest.raises(ValueError):
            forall_moves(k1_model, initial_network(k1_model), atoms_only=False)


class TestExistsSurvives:
    def test_depth_zero_vacuous(self, k1_model):
        assert exists_survives(k1_model, 0).status == "survives"

    def test_depth_one_matches_naive_oracle(self, k1_model):
        verdict = exists_survives(k1_model, 1)
        oracle = naive_survives(k1_model, initial_network(k1_model), 1)
        assert (verdict.status == "survives") == oracle

    def test_response_sets_match_naive_oracle(self, k1_model):
        net = initial_network(k1_model)
        for move in forall_moves(k1_model, net)[:6]:
            engine = {n.key() for n in exists_responses(k1_model, net, move)}
            oracle = {n.key() for n in
                      naive_game_responses(k1_model, net,
                                           (move.v, move.i, move.atom))}
            assert engine == oracle

    def test_depth_two_survives_and_monotone(self, k1_model):
        v2 = exists_survives(k1_model, 2)
        v1 = exists_survives(k1_model, 1)
        assert v2.status == "survives"
        if v2.status == "survives":
            assert v1.status == "survives"

    def test_budget_gives_unknown(self, k1_model):
        verdict = exists_survives(k1_model, 2, max_visits=2)
        assert verdict.status == "unknown"

    def test_depth_two_actually_grows_networks(self, k1_model):
        # guards against a vacuous depth-2 verdict: second fresh nodes happen
        collected = []
        exists_survives(k1_model, 2, collect=collected)
        assert {len(net.nodes) for net in collected} == {1, 2, 3}

    def test_verdict_and_visit_count_deterministic(self, k1_model):
        first = exists_survives(k1_model, 2)
        second = exists_survives(k1_model, 2)
        assert (first.status, first.visited) == (second.status, second.visited)


class TestPaperStrategy:
    def test_survives_depth_one(self, k1_model):
        assert exists_survives(k1_model, 1, strategy="paper").status == "survives"

    def test_precondition_failure_depth_two(self, k1_model):
        verdict = exists_survives(k1_model, 2, strategy="paper")
        assert verdict.status == "precondition_failed"
        assert verdict.round_failed == 1
        assert "independent" in verdict.reason

    def test_precondition_failure_on_k2_too(self, k2_model):
        verdict = exists_survives(k2_model, 2, strategy="paper")
        assert verdict.status == "precondition_failed"

    def test_paper_networks_valid(self, k1_model):
        collected = []
        exists_survives(k1_model, 1, strategy="paper", collect=collected)
        for net in collected:
            assert validate_network(net, k1_model, "polyadic") == []

    def test_paper_response_keeps_old_labels(self, k1_model):
        net = initial_network(k1_model)
        move = next(mv for mv in forall_moves(k1_model, net)
                    if net.labels[mv.v] != mv.atom)
        net2 = paper_response(k1_model, net, move)
        assert net2.nodes == (0, 1)
        for t, lab in net.labels.items():
            assert net2.labels[t] == lab
        w0 = move.v[:move.i] + (1,) + move.v[move.i + 1:]
        assert net2.labels[w0] == move.atom


class TestGatedBoundaryCoherence:
    def test_boundary_coherent_when_theta_margin_holds(self):
        # chi(C3 x 3) = 9 > 6, so the 2n-margin condition holds here
        m = ags.build_model(cycle_graph(3), 3)
        assert ags.theta(m, 6)
        collected = []
        exists_survives(m, 1, collect=collected)
        three_node = None
        net = max(collected, key=lambda nn: len(nn.nodes))
        move = next(mv for mv in forall_moves(m, net)
                    if all(net.labels[w] != mv.atom
                           for w in [mv.v[:mv.i] + (x,) + mv.v[mv.i + 1:]
                                     for x in net.nodes]))
        three_node = next(iter(exists_responses(m, net, move)))
        assert len(three_node.nodes) == 3
        patch = boundary(three_node, m)
        assert patch_system_coherent(patch, m)


class TestTraceAndJson:
    def test_network_json_round_trip(self, k1_model):
        collected = []
        exists_survives(k1_model, 1, collect=collected)
        net = max(collected, key=lambda nn: len(nn.nodes))
        data = network_to_json(net)
        back = network_from_json(data, 3)
        assert back.labels == net.labels and back.nodes == net.nodes

    def test_sample_play(self, k1_model):
        states = sample_play(k1_model, 2)
        assert states[0].round == 0
        assert len(states) >= 2
        for state in states:
            assert validate_network(state.network, k1_model, "polyadic") == []

"""Exact solver, model emitter, and the coverage gadget.

The solver is checked for exact agreement with the exhaustive search in
bruteforce on small instances, for dominance over the greedy planner
everywhere, and for internal consistency through the emitted integer
model: the solution's assignment must satisfy every constraint and
reproduce the objective value.
"""

import random
from collections import deque

import pytest

from bruteforce import best_coverage, best_protected
from conftest import make_graph
from maxflowprot.exact import (
    IlpModel,
    ModelFormatError,
    SearchBudget,
    assignment_for,
    emit_model,
    parse_model,
    reduce_mcg,
    solve_exact,
    validate_assignment,
)
from maxflowprot.generator import GeneratorConfig, generate_instance
from maxflowprot.graph import assert_unique_min_cut, max_flow
from maxflowprot.heuristic import run_heuristic


def small_corpus(seed, count, sizes=(4, 5, 6)):
    rng = random.Random(seed)
    return [
        generate_instance(
            GeneratorConfig(node_count=rng.choice(sizes), seed=seed * 1000 + i)
        )
        for i in range(count)
    ]


def hop_distances(g):
    dist = {g.source: 0}
    q = deque([g.source])
    while q:
        v = q.popleft()
        for eid in g.out_edges[v]:
            h = g.head(eid)
            if h not in dist:
                dist[h] = dist[v] + 1
                q.append(h)
    return dist


class TestSolveExact:
    def test_matches_bruteforce_on_fixtures(
        self, double_fan, branch_merge, split_reach_postcut
    ):
        for g in (double_fan, branch_merge, split_reach_postcut):
            assert solve_exact(g).protected_count == best_protected(g)

    def test_double_fan_protects_both_paths(self, double_fan):
        sol = solve_exact(double_fan)
        assert sol.protected_count == 2
        assert sol.protected == (True, True)

    def test_matches_bruteforce_on_corpus(self):
        for g in small_corpus(seed=41, count=25):
            assert solve_exact(g).protected_count == best_protected(g), g

    def test_dominates_heuristic_any_seed(self):
        for g in small_corpus(seed=42, count=12):
            exact = solve_exact(g).protected_count
            for seed in range(4):
                assert run_heuristic(g, seed=seed).protected_count <= exact

    def test_solution_structure(self, layered_mesh):
        sol = solve_exact(layered_mesh)
        sub = sol.subgraph
        gh = sub.graph
        cut_ids = sub.cut_edge_ids()
        assert len(sol.routing.paths) == len(cut_ids) == 4
        used = set()
        for i, path in enumerate(sol.routing.paths):
            assert path[-1] == cut_ids[i]
            assert sol.routing.cutting_edge[i] == path[-1]
            assert gh.tail(path[0]) == gh.source
            assert gh.head(path[-1]) == sub.virtual_sink
            for a, b in zip(path, path[1:]):
                assert gh.head(a) == gh.tail(b)
            assert used.isdisjoint(path)
            used.update(path)
        xs = set(sol.x_nodes)
        assert {end for end, _ in sol.extra_paths} == xs
        for i, path in enumerate(sol.routing.paths):
            interior = {gh.head(e) for e in path[:-1]}
            assert sol.protected[i] == bool(interior & xs)
        assert sol.protected_count == sum(sol.protected)
        assert not sol.exhausted

    def test_objective_composition(self, layered_mesh):
        sol = solve_exact(layered_mesh)
        gh = sol.subgraph.graph
        d = hop_distances(gh)
        xs = set(sol.x_nodes)
        delta = sum(
            d[u]
            for path in sol.routing.paths
            for u in {gh.head(e) for e in path[:-1]} & xs
        )
        assert sol.delta == delta
        assert sol.objective == gh.num_edges * sol.protected_count + delta

    def test_deterministic(self, branch_merge):
        a = solve_exact(branch_merge)
        b = solve_exact(branch_merge)
        assert a.routing.paths == b.routing.paths
        assert a.x_nodes == b.x_nodes
        assert a.extra_paths == b.extra_paths

    def test_rejects_ambiguous_cut(self, diamond_ladder):
        with pytest.raises(ValueError, match="not unique"):
            solve_exact(diamond_ladder)

    def test_rejects_disconnected_endpoints(self):
        with pytest.raises(ValueError, match="connectivity"):
            solve_exact(make_graph("S a,b T"))


class TestBudget:
    def test_tick_accounting(self):
        budget = SearchBudget(max_nodes=2).start()
        assert budget.tick() is False
        assert budget.tick() is False
        assert budget.tick() is True
        assert budget.exhausted
        assert budget.nodes == 3

    def test_deadline(self):
        budget = SearchBudget(max_seconds=0).start()
        assert budget.tick() is True

    def test_start_resets(self):
        budget = SearchBudget(max_nodes=1)
        budget.start()
        budget.tick()
        budget.tick()
        assert budget.exhausted
        budget.start()
        assert budget.nodes == 0
        assert not budget.exhausted

    def test_exhausted_run_keeps_heuristic_floor(self):
        for g in small_corpus(seed=43, count=10):
            sol = solve_exact(g, budget=SearchBudget(max_nodes=1))
            assert sol.exhausted
            assert sol.protected_count >= run_heuristic(g).protected_count

    def test_unlimited_budget_not_exhausted(self, double_fan):
        assert not solve_exact(double_fan, budget=SearchBudget()).exhausted


class TestModelEmission:
    def test_round_trip(self, double_fan):
        model = emit_model(double_fan)
        assert parse_model(model.to_text()) == model

    def test_round_trip_on_corpus(self):
        for g in small_corpus(seed=44, count=5):
            model = emit_model(g)
            assert parse_model(model.to_text()) == model

    def test_parameters(self, layered_mesh):
        model = emit_model(layered_mesh)
        sub = solve_exact(layered_mesh).subgraph
        gh = sub.graph
        assert model.h == max_flow(layered_mesh).value
        assert model.w == gh.num_edges
        assert model.omega == gh.num_nodes + 1
        assert dict(model.node_tokens) == {
            f"n{i}": v for i, v in enumerate(gh.nodes)
        }
        assert dict(model.d) == {
            f"n{gh.index(v)}": dist for v, dist in hop_distances(gh).items()
        }

    def test_variable_counts(self, double_fan):
        model = emit_model(double_fan)
        sub = solve_exact(double_fan).subgraph
        v = sub.graph.num_nodes
        e = sub.graph.num_edges
        h = model.h
        assert len(model.binaries) == h + h * e + h * v + v * e + v + h * v
        assert len(set(model.binaries)) == len(model.binaries)
        assert model.integers == tuple(
            f"delta_{i}_n{j}" for i in range(1, h + 1) for j in range(v)
        )
        assert len(model.objective) == h + h * v

    def test_expected_constraints_present(self, double_fan):
        model = emit_model(double_fan)
        names = {c.name for c in model.constraints}
        assert "src_out_1" in names
        assert "fix_x_source" in names
        assert "fix_x_sink" in names
        e = solve_exact(double_fan).subgraph.graph.num_edges
        assert {f"cap_e{i}" for i in range(e)} <= names

    def test_rejects_ambiguous_cut(self, diamond_ladder):
        with pytest.raises(ValueError, match="not unique"):
            emit_model(diamond_ladder)


class TestAssignmentValidation:
    def test_solution_satisfies_model(self, double_fan, layered_mesh,
                                      branch_merge):
        for g in (double_fan, layered_mesh, branch_merge):
            model = emit_model(g)
            sol = solve_exact(g)
            assert validate_assignment(model, assignment_for(model, sol)) == ()

    def test_solution_satisfies_model_on_corpus(self):
        for g in small_corpus(seed=45, count=12):
            model = emit_model(g)
            sol = solve_exact(g)
            assignment = assignment_for(model, sol)
            assert validate_assignment(model, assignment) == ()
            value = sum(
                coef * assignment.get(var, 0) for coef, var in model.objective
            )
            assert value == sol.objective

    def test_detects_unrouted_commodity(self, double_fan):
        model = emit_model(double_fan)
        assignment = assignment_for(model, solve_exact(double_fan))
        dropped = next(v for v in assignment if v.startswith("f_1_e"))
        assignment[dropped] = 0
        bad = validate_assignment(model, assignment)
        assert any(name.startswith("src_out_1") or
                   name.startswith("conserve_1") or
                   name.startswith("onpath_1") for name in bad)

    def test_detects_phantom_decoder(self, double_fan):
        model = emit_model(double_fan)
        sol = solve_exact(double_fan)
        assignment = assignment_for(model, sol)
        tokens = dict(model.node_tokens)
        spare = next(
            tok for tok, node in model.node_tokens
            if node not in sol.x_nodes and assignment.get(f"x_{tok}", 0) == 0
        )
        assignment[f"x_{spare}"] = 1
        bad = validate_assignment(model, assignment)
        assert f"extra_delivered_{spare}" in bad or "fix_x_source" in bad \
            or "fix_x_sink" in bad

    def test_detects_domain_violations(self, double_fan):
        model = emit_model(double_fan)
        assignment = assignment_for(model, solve_exact(double_fan))
        assignment["sigma_1"] = 2
        bad = validate_assignment(model, assignment)
        assert "domain:sigma_1" in bad


class TestModelParsing:
    def test_parse_errors(self):
        with pytest.raises(ModelFormatError, match="incomplete"):
            parse_model("param h 2\n")
        with pytest.raises(ModelFormatError, match="unknown param"):
            parse_model("param bogus 3\nend\n")
        with pytest.raises(ModelFormatError, match="unrecognized"):
            parse_model("what 1 2\n")
        good = (
            "param h 1\nparam w 1\nparam omega 2\n"
            "maximize 1 sigma_1\nsubject to\n"
            "c0: 1 sigma_1 <= 1\nbinary sigma_1\ninteger\nend\n"
        )
        parsed = parse_model(good)
        assert parsed.h == 1 and parsed.constraints[0].name == "c0"
        with pytest.raises(ModelFormatError, match="after end"):
            parse_model(good + "param h 2\n")
        with pytest.raises(ModelFormatError, match="missing name"):
            parse_model(good.replace("c0: ", ""))
        with pytest.raises(ModelFormatError, match="malformed constraint"):
            parse_model(good.replace("<= 1", "<="))
        with pytest.raises(ModelFormatError, match="expected coefficient"):
            parse_model(good.replace("maximize 1 sigma_1", "maximize x y"))
        with pytest.raises(ModelFormatError, match="dangling"):
            parse_model(good.replace("maximize 1 sigma_1", "maximize 1"))

    def test_comments_and_blanks_ignored(self):
        text = (
            "# model\nparam h 1\n\nparam w 1\nparam omega 2\n"
            "maximize 1 sigma_1\nsubject to\n"
            "c0: 1 sigma_1 - 1 sigma_1 = 0\nbinary sigma_1\ninteger\nend\n"
        )
        model = parse_model(text)
        assert model.constraints[0].terms == ((1, "sigma_1"), (-1, "sigma_1"))


class TestCoverageGadget:
    def test_equivalence_with_bruteforce(self):
        cases = [
            (["a", "b", "c"], [[{"a", "b"}, {"c"}]], 1),
            (["a", "b", "c"], [[{"a", "b"}, {"c"}]], 2),
            (["a", "b", "c", "d"], [[{"a", "b"}], [{"c"}, {"d"}]], 2),
            (["a", "b", "c", "d"], [[{"a"}, {"b"}], [{"c", "d"}]], 1),
            (["a", "b"], [[{"a"}], [{"b"}]], 2),
            (["a", "b", "c"], [[{"a", "b", "c"}]], 1),
        ]
        for elements, groups, budget in cases:
            red = reduce_mcg(elements, groups, budget)
            want = best_coverage(elements, groups, budget)
            assert solve_exact(red.graph).protected_count == want, (
                elements, groups, budget,
            )

    def test_gadget_shape(self):
        red = reduce_mcg(["a", "b", "c"], [[{"a", "b"}, {"c"}]], 2)
        g = red.graph
        assert assert_unique_min_cut(g)
        assert max_flow(g).value == 3
        assert red.set_nodes == ("q0", "q1")
        assert red.set_elements == (frozenset("ab"), frozenset("c"))
        assert red.set_group == (0, 0)
        assert red.budget_node == "B"
        assert red.k_star == 1

    def test_budget_capped_by_group_count(self):
        red = reduce_mcg(["a"], [[{"a"}]], 5)
        assert red.k_star == 1

    def test_uncovered_element_gets_direct_edge(self):
        red = reduce_mcg(["a", "b"], [[{"a"}]], 1)
        g = red.graph
        assert ("S", "T") in g.edges

    def test_unique_cut_on_varied_instances(self):
        rng = random.Random(9)
        for _ in range(10):
            n_el = rng.randint(1, 5)
            elements = [f"e{i}" for i in range(n_el)]
            groups = []
            pool = list(elements)
            for _ in range(rng.randint(1, 3)):
                group = []
                for _ in range(rng.randint(1, 2)):
                    take = rng.sample(pool, k=min(len(pool), rng.randint(1, 2)))
                    if take:
                        group.append(set(take))
                        for t in take:
                            pool.remove(t)
                if group:
                    groups.append(group)
            if not groups:
                continue
            red = reduce_mcg(elements, groups, rng.randint(1, 3))
            assert assert_unique_min_cut(red.graph)
            assert max_flow(red.graph).value == n_el

    def test_validation_errors(self):
        with pytest.raises(ValueError, match="empty ground set"):
            reduce_mcg([], [[{"a"}]], 1)
        with pytest.raises(ValueError, match="duplicate ground-set"):
            reduce_mcg(["a", "a"], [[{"a"}]], 1)
        with pytest.raises(ValueError, match="at least 1"):
            reduce_mcg(["a"], [[{"a"}]], 0)
        with pytest.raises(ValueError, match="at least 1"):
            reduce_mcg(["a"], [[{"a"}]], -1)
        with pytest.raises(ValueError, match="empty groups"):
            reduce_mcg(["a"], [], 1)
        with pytest.raises(ValueError, match="empty groups"):
            reduce_mcg(["a"], [[]], 1)
        with pytest.raises(ValueError, match="empty sets"):
            reduce_mcg(["a"], [[set()]], 1)
        with pytest.raises(ValueError, match="unknown elements"):
            reduce_mcg(["a"], [[{"a", "z"}]], 1)
        with pytest.raises(ValueError, match="share a group"):
            reduce_mcg(["a", "b"], [[{"a", "b"}], [{"b"}]], 1)

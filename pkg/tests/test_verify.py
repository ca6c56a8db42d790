import random

import pytest

from covassist.dialogue import automaton
from covassist.verify import (
    AlwaysGlobally,
    And,
    Automaton,
    DeadlockAtom,
    ExistsEventually,
    FormulaError,
    Not,
    Or,
    StateAtom,
    check,
    deadlock_free,
    parse_formula,
    parse_model,
    product,
    reachable,
    run_model,
    safety_response,
)

from oracles import closure_reachable


def strip_edges(auto, keep):
    return Automaton(auto.states, auto.initial, frozenset(e for e in auto.edges if keep(e)))


class TestAutomatonType:
    def test_initial_must_be_a_state(self):
        with pytest.raises(ValueError, match="initial"):
            Automaton(frozenset({"A"}), "B", frozenset())

    def test_edges_must_stay_inside(self):
        with pytest.raises(ValueError, match="state set"):
            Automaton(frozenset({"A"}), "A", frozenset({("A", "go", "B")}))


class TestReachable:
    def test_ontology_reachable_with_witness(self):
        verdict = reachable(automaton(), StateAtom("Ontology"))
        assert verdict.holds
        assert verdict.replay(automaton())
        labels = [label for _, label, _ in verdict.witness]
        # shortest route is via GetResponse2 (3 edges); the Confirmation route has 4
        assert labels == ["ConversationStarts", "GetType", "GetResponse2"]

    def test_initial_state_has_empty_witness(self):
        verdict = reachable(automaton(), StateAtom("Start"))
        assert verdict.holds
        assert verdict.witness == ()

    def test_removing_ontology_entries_breaks_reachability(self):
        mutated = strip_edges(automaton(), lambda e: e[2] != "Ontology")
        assert not reachable(mutated, StateAtom("Ontology")).holds

    def test_callable_predicates_accepted(self):
        verdict = reachable(automaton(), lambda s: s.startswith("Trained"))
        assert verdict.holds


class TestDeadlockFree:
    def test_dialogue_automaton_is_deadlock_free(self):
        assert deadlock_free(automaton()).holds

    def test_removing_go_discovery_creates_sink_at_ontology(self):
        mutated = strip_edges(automaton(), lambda e: e[1] != "GoDiscovery")
        verdict = deadlock_free(mutated)
        assert not verdict.holds
        assert verdict.witness[-1][2] == "Ontology"
        assert verdict.replay(mutated)

    def test_single_state_self_loop_holds(self):
        loop = Automaton(frozenset({"A"}), "A", frozenset({("A", "spin", "A")}))
        assert deadlock_free(loop).holds


class TestSafetyResponse:
    def test_dialogue_automaton_holds(self):
        assert safety_response(automaton()).holds

    def test_cutting_both_reply_paths_fails(self):
        mutated = strip_edges(
            automaton(), lambda e: e[1] != "KeepSpeaking" and e[2] != "Ontology"
        )
        assert not safety_response(mutated).holds

    def test_trivial_trainedbot_automaton_holds(self):
        trivial = Automaton(frozenset({"TrainedBot"}), "TrainedBot", frozenset())
        assert safety_response(trivial).holds


class TestProduct:
    def test_reachable_pairs_are_square_of_single(self):
        auto = automaton()
        single = closure_reachable(sorted(auto.states), auto.initial, set(auto.edges))
        two = product(auto, auto)
        pairs = closure_reachable(sorted(two.states), two.initial, set(two.edges))
        assert len(pairs) == len(single) ** 2 == 36

    def test_edge_count_formula(self):
        auto = automaton()
        two = product(auto, auto)
        # all pairs are reachable here, so the unrestricted count applies
        assert len(two.edges) == len(auto.states) * len(auto.edges) * 2

    def test_product_with_single_state_is_isomorphic(self):
        auto = automaton()
        unit = Automaton(frozenset({"U"}), "U", frozenset())
        two = product(auto, unit)
        assert len(two.states) == len(auto.states)
        assert len(two.edges) == len(auto.edges)
        reach_two = closure_reachable(sorted(two.states), two.initial, set(two.edges))
        reach_one = closure_reachable(sorted(auto.states), auto.initial, set(auto.edges))
        assert len(reach_two) == len(reach_one)

    def test_component_projection(self):
        two = product(automaton(), automaton())
        state = two.initial
        assert two.component(state, "c1") == "Start"
        assert two.component(state, "c2") == "Start"
        with pytest.raises(FormulaError, match="unknown instance"):
            two.component(state, "c9")

    def test_duplicate_instance_names_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            product(automaton(), automaton(), names=("c1", "c1"))


class TestCheck:
    def test_parallel_rules_hold(self):
        two = product(automaton(), automaton())
        for left, right in (("Ontology", "TrainedBot"), ("TrainedBot", "Ontology"), ("Ontology", "Ontology")):
            formula = ExistsEventually(And(StateAtom(left, "c1"), StateAtom(right, "c2")))
            verdict = check(formula, two)
            assert verdict.holds, formula
            assert verdict.replay(two)

    def test_ag_false_fails(self):
        formula = AlwaysGlobally(And(StateAtom("Start"), Not(StateAtom("Start"))))
        verdict = check(formula, automaton())
        assert not verdict.holds
        assert verdict.witness == ()  # the initial state already violates

    def test_ag_not_deadlock_equals_deadlock_free(self):
        for auto in (automaton(), strip_edges(automaton(), lambda e: e[1] != "GoDiscovery")):
            assert check(AlwaysGlobally(Not(DeadlockAtom())), auto).holds == deadlock_free(auto).holds

    def test_malformed_instance_reference(self):
        formula = ExistsEventually(StateAtom("Ontology", "ghost"))
        with pytest.raises(FormulaError):
            check(formula, automaton())


class TestRandomizedAgainstClosure:
    def test_reachable_agrees_with_transitive_closure(self):
        rng = random.Random(42)
        labels = ["a", "b", "c"]
        for _ in range(300):
            n = rng.randrange(1, 9)
            states = [f"s{i}" for i in range(n)]
            edges = set()
            for _ in range(rng.randrange(0, 2 * n + 1)):
                edges.add((rng.choice(states), rng.choice(labels), rng.choice(states)))
            auto = Automaton(frozenset(states), "s0", frozenset(edges))
            expected = closure_reachable(states, "s0", edges)
            for state in states:
                verdict = reachable(auto, StateAtom(state))
                assert verdict.holds == (state in expected), (states, edges, state)
                assert verdict.replay(auto)
                if verdict.holds:
                    end = verdict.witness[-1][2] if verdict.witness else auto.initial
                    assert end == state


class TestTextFormat:
    MODEL = """
    # toy model
    state A
    state B
    init A
    edge A go B
    edge B back A
    check EF(B)
    check AG(not deadlock)
    check EF(c1.B and c2.B)
    """

    def test_parse_formula_roundtrip(self):
        formula = parse_formula("EF(c1.Ontology and c2.TrainedBot)")
        assert isinstance(formula, ExistsEventually)
        assert formula.pred == And(StateAtom("Ontology", "c1"), StateAtom("TrainedBot", "c2"))

    def test_parse_precedence(self):
        formula = parse_formula("EF(A or B and not C)")
        assert formula.pred == Or(StateAtom("A"), And(StateAtom("B"), Not(StateAtom("C"))))

    def test_parse_errors(self):
        for bad in ("EF(", "XX(A)", "EF(A B)", "EF(and)", "EF(A) extra"):
            with pytest.raises(FormulaError):
                parse_formula(bad)

    def test_parse_model(self):
        auto, formulas = parse_model(self.MODEL)
        assert auto.states == {"A", "B"}
        assert auto.initial == "A"
        assert len(formulas) == 3

    def test_run_model_mixes_plain_and_product_checks(self):
        results = run_model(self.MODEL)
        assert [verdict.holds for _, verdict in results] == [True, True, True]

    def test_model_requires_init(self):
        with pytest.raises(FormulaError, match="init"):
            parse_model("state A\n")

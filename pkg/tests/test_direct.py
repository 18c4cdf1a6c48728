"""Direct route reconstruction: conformance against an independently
written interpreter of the set-graph construction procedure, the
conditioning scans, and direct-route ranking."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from fixtures import fixture_corpus, two_step_chain
from retroplan.chem import parse_smiles
from retroplan.direct import (
    MolSetNode,
    TemplateSequence,
    condition_scan,
    rank_direct_routes,
    reconstruct_routes,
    routes_from_graph,
)
from retroplan.routes import build_route
from retroplan.stock import StockSet
from retroplan.templates import (
    apply_template,
    extract_template,
    parse_retro_template,
)

AMIDE = "[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH].[N:3]"
BROMIDE = "[C:1][OH:2]>>[C:1]Br.[OH:2]"


# ---------------------------------------------------------------------------
# independent interpreter: a line-by-line transliteration of the
# molecular-set-graph pseudocode, sharing only the single-template
# application primitive

class _RefNode:
    def __init__(self, mols, parent=None):
        self.mols = mols                      # tuple of Molecule
        self.purchasable = set()
        self.parent = parent
        self.children = []
        self.template_index = None
        self.applied_to = None
        self.produced = None


def reference_interpreter(target, templates, stock=None):
    n0 = _RefNode((target,))
    if stock is not None:
        for m in n0.mols:
            if m in stock:
                n0.purchasable.add(m.canonical())
    graph_nodes = [n0]
    current = [n0]
    for i, t in enumerate(templates):
        nxt = []
        for n in current:
            results = _ref_apply_to_set(n.mols, t)
            if results:
                for new_mols, applied_to, produced in results:
                    child = _RefNode(new_mols, parent=n)
                    child.applied_to = applied_to
                    child.produced = produced
                    n.children.append(child)
                    graph_nodes.append(child)
                    nxt.append(child)
        for child in nxt:
            child.template_index = i
            if stock is not None:
                for m in child.mols:
                    if m in stock:
                        child.purchasable.add(m.canonical())
        if nxt:
            current = nxt
    return graph_nodes


def _ref_apply_to_set(mols, template):
    results = []
    for mol in mols:
        for rs in apply_template(template, mol):
            keep = {}
            for other in mols:
                if other is not mol:
                    keep.setdefault(other.canonical(), other)
            for m in rs.molecules:
                keep.setdefault(m.canonical(), m)
            results.append((tuple(keep[c] for c in sorted(keep)),
                            mol.canonical(), rs.key))
    return results


def _ref_signature(node):
    return (
        tuple(m.canonical() for m in node.mols),
        tuple(sorted(node.purchasable)),
        node.template_index,
        node.applied_to,
        tuple(node.produced) if node.produced else None,
        tuple(_ref_signature(c) for c in node.children),
    )


def _impl_signature(node: MolSetNode):
    return (
        node.mols_key(),
        tuple(sorted(node.purchasable)),
        node.template_index,
        node.applied_to,
        tuple(node.produced) if node.produced else None,
        tuple(_impl_signature(c) for c in node.children),
    )


def assert_graph_matches_reference(target, templates, stock):
    seq = TemplateSequence(tuple(templates), log_prob=-1.0)
    graph = reconstruct_routes(target, seq, stock)
    ref_nodes = reference_interpreter(target, templates, stock)
    assert len(graph.nodes) == len(ref_nodes)
    assert _impl_signature(graph.root) == _ref_signature(ref_nodes[0])


def _corpus_templates(corpus):
    out = []
    for rxn in corpus:
        out.append(extract_template(rxn.reactants, rxn.product, radius=1))
    return out


class TestReconstruction:
    def test_linear_two_step(self):
        chain = two_step_chain("CC", "CCC")
        templates = [
            extract_template(r.reactants, r.product, radius=1)
            for r in chain.reactions
        ]
        stock = StockSet.from_smiles(chain.stock_smiles)
        seq = TemplateSequence(tuple(templates), log_prob=-1.0)
        graph = reconstruct_routes(chain.target, seq, stock)
        leaves = graph.leaves()
        assert len(graph.nodes) == 3
        assert leaves[0].solved

    def test_frontier_retained_when_inapplicable(self):
        target = parse_smiles("CC(=O)NC")
        t_miss = parse_retro_template(BROMIDE)   # no hydroxyl in the target
        t_hit = parse_retro_template(AMIDE)
        seq = TemplateSequence((t_miss, t_hit))
        graph = reconstruct_routes(target, seq)
        # first template did not advance the frontier; the second applied
        # to the root
        assert len(graph.nodes) == 2
        assert graph.nodes[1].template_index == 1

    def test_all_invalid_yields_root_only(self):
        target = parse_smiles("CC(=O)NC")
        seq = TemplateSequence((parse_retro_template(BROMIDE),) * 3)
        graph = reconstruct_routes(target, seq)
        assert len(graph.nodes) == 1

    def test_no_stock_no_purchasable_flags(self):
        target = parse_smiles("CC(=O)NC")
        seq = TemplateSequence((parse_retro_template(AMIDE),))
        graph = reconstruct_routes(target, seq, stock=None)
        assert all(not n.purchasable for n in graph.nodes)

    def test_multi_site_keeps_all_children(self):
        target = parse_smiles("OCCCCO")
        seq = TemplateSequence((parse_retro_template(BROMIDE),))
        graph = reconstruct_routes(target, seq)
        assert len(graph.root.children) == 2

    def test_decoded_steps_bounded_by_sequence(self):
        corpus = fixture_corpus(12)[:12]
        templates = _corpus_templates(corpus)
        for rxn in corpus[:6]:
            seq = TemplateSequence(tuple(templates[:4]))
            graph = reconstruct_routes(rxn.product, seq, None)
            for route in routes_from_graph(graph, None):
                assert route.length <= len(seq.templates)


class TestConformance:
    def test_randomized_against_reference(self):
        rng = random.Random(20240817)
        corpus = fixture_corpus(30)
        templates = _corpus_templates(corpus)
        checked = 0
        for case in range(50):
            rxn = rng.choice(corpus)
            target = rxn.product
            seq = [rng.choice(templates)
                   for _ in range(rng.randint(1, 4))]
            stock_pool = [m.canonical() for m in rxn.reactants]
            stock = None
            if rng.random() < 0.7:
                chosen = [s for s in stock_pool if rng.random() < 0.6]
                stock = StockSet(chosen)
            assert_graph_matches_reference(target, seq, stock)
            checked += 1
        assert checked == 50

    def test_branch_cases_against_reference(self):
        target = parse_smiles("CC(=O)NCCO")
        t1 = parse_retro_template(AMIDE)
        t2 = parse_retro_template(BROMIDE)
        stock = StockSet.from_smiles(["CC(=O)O", "NCCO"])
        for seq in ([t1], [t2, t1], [t1, t2], [t2, t2], [t1, t1, t2]):
            assert_graph_matches_reference(target, seq, stock)
            assert_graph_matches_reference(target, seq, None)


class RouteTableBackend:
    """sample_route_sequences from a canned plan for scan tests."""

    def __init__(self, sequences_by_condition):
        self.sequences_by_condition = sequences_by_condition
        self.calls = []

    def sample_route_sequences(self, smiles, n_samples, condition=None):
        self.calls.append((condition, n_samples))
        return self.sequences_by_condition.get(condition, [])[:n_samples]


class TestConditionScan:
    def test_n_step_issues_eighty_samples(self):
        backend = RouteTableBackend({})
        condition_scan(parse_smiles("CC(=O)NC"), backend, "n_step")
        assert len(backend.calls) == 8
        assert sum(n for _c, n in backend.calls) == 80
        assert backend.calls[0][0] == "<STEPS=2>"

    def test_vanilla_issues_fifty(self):
        backend = RouteTableBackend({})
        condition_scan(parse_smiles("CC(=O)NC"), backend, "vanilla")
        assert backend.calls == [(None, 50)]

    def test_leaf_size_issues_seventy(self):
        backend = RouteTableBackend({})
        condition_scan(parse_smiles("CC(=O)NC"), backend, "leaf_size")
        assert sum(n for _c, n in backend.calls) == 70
        assert backend.calls[0][0] == "<LEAF_ATOMS=10>"

    def test_scan_continues_past_empty_conditions(self):
        chain = two_step_chain("CC", "CCC")
        templates = [
            extract_template(r.reactants, r.product, radius=1).source_smarts
            for r in chain.reactions
        ]
        backend = RouteTableBackend({"<STEPS=2>": [(templates, -1.5)]})
        stock = StockSet.from_smiles(chain.stock_smiles)
        got = condition_scan(chain.target, backend, "n_step", stock)
        assert len(backend.calls) == 8
        assert any(route.solved for route, _lp in got)

    def test_invalid_template_truncates_decoding(self):
        chain = two_step_chain("CC", "CCC")
        templates = [
            extract_template(r.reactants, r.product, radius=1).source_smarts
            for r in chain.reactions
        ]
        bad = [templates[0], "garbage>>", templates[1]]
        backend = RouteTableBackend({None: [(bad, -1.0)]})
        stock = StockSet.from_smiles(chain.stock_smiles)
        got = condition_scan(chain.target, backend, "vanilla", stock)
        assert got
        assert all(route.length <= 1 for route, _lp in got)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            condition_scan(parse_smiles("C"), RouteTableBackend({}), "bogus")


class TestRanking:
    def _route(self, solved: bool, steps: int):
        def in_stock(_s):
            return solved

        chain = [("T", "t", "h", [f"I{i}"]) for i in range(steps)]
        # chain steps each rewrite the previous intermediate
        steps_list = []
        prev = "T"
        for i in range(steps):
            steps_list.append((prev, "t", "h", [f"I{i}"]))
            prev = f"I{i}"
        return build_route("T", steps_list, in_stock)

    def test_solved_beats_unsolved_regardless_of_length(self):
        solved3 = self._route(True, 3)
        unsolved2 = self._route(False, 2)
        ranked = rank_direct_routes([(unsolved2, -0.1), (solved3, -9.0)])
        assert ranked[0][0] is solved3

    def test_shorter_beats_longer_among_solved(self):
        s2 = self._route(True, 2)
        s3 = self._route(True, 3)
        ranked = rank_direct_routes([(s3, -0.1), (s2, -9.0)])
        assert ranked[0][0] is s2

    def test_log_prob_breaks_full_ties(self):
        a = self._route(True, 2)
        b = self._route(True, 2)
        ranked = rank_direct_routes([(a, -2.0), (b, -1.0)])
        assert ranked[0][0] is b

    def test_against_bruteforce_comparator(self):
        rng = random.Random(11)
        routes = []
        for _ in range(50):
            routes.append((self._route(rng.random() < 0.5, rng.randint(1, 5)),
                           -rng.random() * 10))

        def cmp_key(item):
            route, lp = item
            return (not route.solved, route.length, -lp)

        expected = sorted(routes, key=cmp_key)
        got = rank_direct_routes(routes)
        assert [cmp_key(x) for x in got] == [cmp_key(x) for x in expected]

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.booleans(), st.integers(1, 9),
                              st.floats(-50, 0)), min_size=1, max_size=20))
    def test_total_preorder(self, stats):
        routes = [(self._route(solved, length), lp)
                  for solved, length, lp in stats]
        ranked = rank_direct_routes(routes)
        keys = [(not r.solved, r.length, -lp) for r, lp in ranked]
        assert keys == sorted(keys)


def test_condition_scan_propagates_backend_failure():
    from retroplan.policy import BackendUnavailableError

    class DeadBackend:
        def sample_route_sequences(self, smiles, n_samples, condition=None):
            raise BackendUnavailableError("connection refused")

    with pytest.raises(BackendUnavailableError):
        condition_scan(parse_smiles("CC(=O)NC"), DeadBackend(), "vanilla")

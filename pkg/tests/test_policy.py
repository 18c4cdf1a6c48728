"""Policy interface: proposals, strict filtering, priors, table backend."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from fixtures import fixture_corpus
from retroplan.chem import parse_smiles
from retroplan.policy import (
    EmptyDatasetError,
    PolicyConfig,
    TablePolicy,
    build_table_policy,
    normalize_priors,
    propose,
)
from retroplan.templates import (
    TemplateLibrary,
    extract_template,
    template_hash,
)

AMIDE = "[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH].[N:3]"
ESTER = "[C:1](=[O:2])[O:3][C:4]>>[C:1](=[O:2])[OH].[O:3][C:4]"
BROMIDE = "[C:1][OH:2]>>[C:1]Br.[OH:2]"


class ListBackend:
    """Static backend returning a fixed raw proposal list."""

    def __init__(self, raw):
        self.raw = raw

    def propose_raw(self, smiles, k, condition=None):
        return self.raw[:k]


class TestPropose:
    def test_sorted_and_truncated(self):
        raw = [(AMIDE, -2.0), (ESTER, -1.0), (BROMIDE, -3.0)]
        got = propose(ListBackend(raw), parse_smiles("CC(=O)NC"),
                      PolicyConfig(k=2))
        assert [p.log_prob for p in got] == [-1.0, -2.0]

    def test_k_truncation_after_strict(self):
        lib = TemplateLibrary()
        lib.add(AMIDE)
        raw = [(ESTER, -0.5), (AMIDE, -1.0)]
        got = propose(ListBackend(raw), parse_smiles("CC(=O)NC"),
                      PolicyConfig(k=1, strict=True, library=lib))
        assert len(got) == 1
        assert got[0].smarts == AMIDE  # strict filter ran before truncation

    def test_strict_soundness(self):
        lib = TemplateLibrary()
        lib.add(AMIDE)
        raw = [(AMIDE, -1.0), (ESTER, -0.5), (BROMIDE, -0.2)]
        got = propose(ListBackend(raw), parse_smiles("CC(=O)NC"),
                      PolicyConfig(k=5, strict=True, library=lib))
        assert all(lib.lookup_hash(template_hash(p.template)) is not None
                   for p in got)

    def test_duplicate_hash_keeps_best(self):
        respelled = "[C:3](=[O:1])[N:2]>>[C:3](=[O:1])[OH].[N:2]"
        raw = [(AMIDE, -2.0), (respelled, -1.0)]
        got = propose(ListBackend(raw), parse_smiles("CC(=O)NC"),
                      PolicyConfig(k=5))
        assert len(got) == 1
        assert got[0].log_prob == -1.0

    def test_unparseable_dropped(self):
        raw = [("not a template", -0.1), (AMIDE, -1.0)]
        got = propose(ListBackend(raw), parse_smiles("CC(=O)NC"),
                      PolicyConfig(k=5))
        assert [p.smarts for p in got] == [AMIDE]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PolicyConfig(k=0)
        with pytest.raises(ValueError):
            PolicyConfig(temperature=0)
        with pytest.raises(ValueError):
            PolicyConfig(strict=True)


class TestNormalizePriors:
    def test_equal_probs_any_temperature(self):
        ps = normalize_priors([math.log(0.4), math.log(0.4)], 5.0)
        assert ps == pytest.approx([0.5, 0.5])

    def test_identity_temperature(self):
        ps = normalize_priors([math.log(0.9), math.log(0.1)], 1.0)
        assert ps == pytest.approx([0.9, 0.1], abs=1e-12)

    def test_temperature_three(self):
        ps = normalize_priors([math.log(0.9), math.log(0.1)], 3.0)
        assert ps == pytest.approx([0.6753, 0.3247], abs=1e-4)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(min_value=-30, max_value=0), min_size=1, max_size=12),
        st.floats(min_value=0.05, max_value=50),
    )
    def test_sum_and_monotonicity(self, log_probs, temperature):
        priors = normalize_priors(log_probs, temperature)
        assert sum(priors) == pytest.approx(1.0, abs=1e-9)
        # rescaling never inverts an ordering (ties may collapse in floats)
        for i in range(len(log_probs)):
            for j in range(len(log_probs)):
                if log_probs[i] > log_probs[j]:
                    assert priors[i] >= priors[j]


class TestTablePolicy:
    def _table(self):
        corpus = fixture_corpus(12)[:12]
        records = []
        for rxn in corpus:
            template = extract_template(rxn.reactants, rxn.product, radius=1)
            records.append((rxn.product.canonical(), template.source_smarts))
        return corpus, build_table_policy(records)

    def test_known_product_recorded_template_first(self):
        corpus, table = self._table()
        rxn = corpus[0]
        template = extract_template(rxn.reactants, rxn.product, radius=1)
        got = propose(table, rxn.product, PolicyConfig(k=10))
        assert got[0].smarts == template.source_smarts

    def test_unseen_product_global_ranking(self):
        _corpus, table = self._table()
        raw = table.propose_raw(parse_smiles("CCCCCCCC").canonical(), 5)
        global_order = [s for s, _ in table.global_counts[:5]]
        assert [s for s, _ in raw] == global_order

    def test_log_probs_nonpositive_and_sorted(self):
        corpus, table = self._table()
        raw = table.propose_raw(corpus[0].product.canonical(), 10)
        lps = [lp for _, lp in raw]
        assert all(lp <= 0 for lp in lps)
        assert lps == sorted(lps, reverse=True)

    def test_deterministic(self):
        corpus, t1 = self._table()
        _, t2 = self._table()
        q = corpus[3].product.canonical()
        assert t1.propose_raw(q, 10) == t2.propose_raw(q, 10)

    def test_empty_dataset(self):
        with pytest.raises(EmptyDatasetError):
            build_table_policy([])

    def test_save_load_identical(self, tmp_path):
        corpus, table = self._table()
        path = tmp_path / "table.json"
        table.save(path)
        loaded = TablePolicy.load(path)
        q = corpus[1].product.canonical()
        assert loaded.propose_raw(q, 10) == table.propose_raw(q, 10)

"""
Tests pour la vérification polynomiale de la popularité
"""

import random

import pytest

from popcap.errors import UnsupportedRegime
from popcap.generators import random_instance, structured_instances
from popcap.model import Instance, Matching, PopularityNotion, enumerate_matchings
from popcap.popverify import (
    build_auxiliary_graph,
    copy_node,
    find_popular_matching,
    house_node,
    is_maximal,
    verify_popular_poly,
)
from popcap.votes import PopularityOracle, is_popular_brute_force, total_vote


def _arcs(aux):
    return {(arc.tail, arc.head): arc.weight for arc in aux.arcs}


def _assert_agrees(instance):
    oracle = PopularityOracle(instance, PopularityNotion.TRADITIONAL)
    for i in range(len(oracle)):
        matching = oracle.matching_at(i)
        popular, witness = verify_popular_poly(instance, matching)
        assert popular == (oracle.dominator_index(i) is None), matching
        if witness is not None:
            outcome = total_vote(
                instance, matching, witness.induced_matching, PopularityNotion.TRADITIONAL
            )
            assert outcome.total < 0


class TestAuxiliaryGraph:
    """Tests pour build_auxiliary_graph"""

    def test_two_copies(self):
        """a de capacité 2, couplé à h1, accepte h1 et h2"""
        instance = Instance.create({"a": ["h1", "h2"]}, {"h1": 1, "h2": 1}, {"a": 2})
        aux = build_auxiliary_graph(instance, Matching.of([("a", "h1")]))
        c1, c2 = copy_node("a", 1), copy_node("a", 2)

        assert aux.copies["a"] == (c1, c2)
        assert _arcs(aux) == {
            (c1, house_node("h1")): 0,
            (house_node("h2"), c1): 1,
            (house_node("h2"), c2): -1,
        }

    def test_empty_matching(self):
        """Sans couplage : aucun arc de couplage, tous les poids valent -1"""
        instance = Instance.create(
            {"a": ["h1", "h2"], "b": ["h2"]}, {"h1": 1, "h2": 1}, {"a": 2}
        )
        aux = build_auxiliary_graph(instance, Matching())

        assert all(arc.tail[0] == "h" for arc in aux.arcs)
        assert all(arc.weight == -1 for arc in aux.arcs)
        assert len(aux.arcs) == 5

    def test_gain_weight_sign(self):
        """a préfère h1 à sa maison h2 : l'arc h1 -> copie pèse -1"""
        instance = Instance.create({"a": ["h1", "h2"]}, {"h1": 1, "h2": 1})
        aux = build_auxiliary_graph(instance, Matching.of([("a", "h2")]))

        assert _arcs(aux)[(house_node("h1"), copy_node("a", 1))] == -1

    def test_weights_in_range(self):
        rng = random.Random(2)
        for _ in range(30):
            instance = random_instance(rng, 3, 3, 3, 1)
            for matching in list(enumerate_matchings(instance, 10_000))[:10]:
                for arc in build_auxiliary_graph(instance, matching).arcs:
                    assert arc.weight in (-1, 0, 1)
                    if arc.tag[0] == "match":
                        assert arc.weight == 0

    def test_unit_houses_required(self):
        instance = Instance.create({"a": ["h1"]}, {"h1": 2})
        with pytest.raises(UnsupportedRegime):
            build_auxiliary_graph(instance, Matching())


class TestVerifyPopular:
    """Tests pour verify_popular_poly"""

    def test_single_edge(self):
        instance = Instance.create({"a": ["h"]}, {"h": 1})
        assert verify_popular_poly(instance, Matching.of([("a", "h")])) == (True, None)

    def test_empty_matching(self):
        """Chemin d'un seul arc, score -1"""
        instance = Instance.create({"a": ["h"]}, {"h": 1})
        popular, witness = verify_popular_poly(instance, Matching())

        assert not popular
        assert witness.kind == "path"
        assert len(witness.arcs) == 1
        assert witness.score == -1
        assert witness.induced_matching == Matching.of([("a", "h")])

    def test_exposed_rival(self):
        """a couplé à h, b exposé n'accepte que h : chemin de score 0, populaire"""
        instance = Instance.create({"a": ["h"], "b": ["h"]}, {"h": 1})
        matching = Matching.of([("a", "h")])

        assert verify_popular_poly(instance, matching) == (True, None)
        assert is_popular_brute_force(instance, matching)[0]

    def test_literal_score_disagrees(self):
        """Le score littéral double le -1 de l'extrémité exposée"""
        instance = Instance.create({"a": ["h"], "b": ["h"]}, {"h": 1})
        popular, witness = verify_popular_poly(
            instance, Matching.of([("a", "h")]), literal_mod=True
        )

        assert not popular
        assert not witness.dominates
        assert witness.induced_matching == Matching.of([("b", "h")])

    def test_negative_cycle(self):
        """Deux demandeurs qui échangent vers leur premier choix"""
        instance = Instance.create({"a": ["h1", "h2"], "b": ["h2", "h1"]}, {"h1": 1, "h2": 1})
        popular, witness = verify_popular_poly(instance, Matching.of([("a", "h2"), ("b", "h1")]))

        assert not popular
        assert witness.kind == "cycle"
        assert witness.induced_matching == Matching.of([("a", "h1"), ("b", "h2")])

    def test_structured_family(self):
        """Accord avec l'oracle sur toutes les instances 2 x 2"""
        for instance in structured_instances(2, 2, applicant_capacities=(1, 2)):
            _assert_agrees(instance)

    def test_random_instances(self):
        rng = random.Random(13)
        for _ in range(150):
            instance = random_instance(rng, rng.randint(1, 4), rng.randint(1, 3), 3, 1)
            _assert_agrees(instance)


@pytest.mark.slow
class TestVerifyPopularExhaustive:
    """Accord avec l'oracle sur un millier d'instances aléatoires"""

    def test_thousand_instances(self):
        rng = random.Random(1000)
        for _ in range(1000):
            instance = random_instance(rng, rng.randint(1, 4), rng.randint(1, 3), 3, 1)
            _assert_agrees(instance)

    def test_three_applicants_family(self):
        for instance in structured_instances(3, 2, applicant_capacities=(1, 2)):
            _assert_agrees(instance)


class TestFindPopular:
    """Tests pour find_popular_matching"""

    def test_maximal(self):
        instance = Instance.create({"a": ["h1"], "b": ["h1", "h2"]}, {"h1": 1, "h2": 1})

        assert not is_maximal(instance, Matching.of([("a", "h1")]))
        assert is_maximal(instance, Matching.of([("a", "h1"), ("b", "h2")]))

    def test_agrees_with_oracle(self):
        rng = random.Random(19)
        for _ in range(60):
            instance = random_instance(rng, rng.randint(1, 4), 3, 2, 1)
            found = find_popular_matching(instance)
            oracle = PopularityOracle(instance, PopularityNotion.TRADITIONAL)

            if found is None:
                assert oracle.popular_indices() == []
            else:
                assert oracle.dominator_index(oracle.index_of(found)) is None

"""
Tests pour la caractérisation des couplages populaires (demandeurs de capacité 1)
"""

import random

import pytest

from popcap.chapop import (
    HouseLevelScreen,
    build_reduced_graph,
    exists_perfect_popular,
    find_popular_cha,
    is_popular_cha,
    max_conditioned_matching_size,
    perfect_popular_possible,
)
from popcap.errors import UnsupportedRegime
from popcap.generators import random_instance, structured_instances, worked_example
from popcap.model import CapacityChange, Instance, Matching, PopularityNotion, is_perfect
from popcap.votes import PopularityOracle


def _two_applicants():
    return Instance.create({"a1": ["h1", "h2"], "a2": ["h1", "h2"]}, {"h1": 1, "h2": 2})


class TestReducedGraph:
    """Tests pour build_reduced_graph"""

    def test_second_choice(self):
        """h1 sur-admiré : les deux demandeurs ont h2 pour second choix"""
        graph = build_reduced_graph(_two_applicants())

        assert graph.admirers["h1"] == ("a1", "a2")
        assert graph.second_choice == {"a1": "h2", "a2": "h2"}
        assert "h1" in graph.saturable
        assert "h2" in graph.sub_admired

    def test_single_house_parallel_edges(self):
        """f(a) = s(a) quand la maison n'est pas sur-admirée"""
        graph = build_reduced_graph(Instance.create({"a": ["h1"]}, {"h1": 1}))

        assert graph.first_choice["a"] == graph.second_choice["a"] == "h1"
        assert graph.edges == (("a", "h1"), ("a", "h1"))

    def test_empty_list(self):
        graph = build_reduced_graph(Instance.create({"a": []}, {"h1": 1}))
        assert graph.first_choice["a"] is None
        assert graph.second_choice["a"] is None

    def test_unit_applicants_required(self):
        instance = Instance.create({"a": ["h1", "h2"]}, {"h1": 1, "h2": 1}, {"a": 2})
        with pytest.raises(UnsupportedRegime):
            build_reduced_graph(instance)


class TestIsPopular:
    """Tests pour is_popular_cha"""

    def test_popular(self):
        matching = Matching.of([("a1", "h1"), ("a2", "h2")])
        assert is_popular_cha(_two_applicants(), matching) == (True, None)

    def test_second_choice_unmatched(self):
        """a1 a un second choix mais reste seul : condition 2"""
        assert is_popular_cha(_two_applicants(), Matching.of([("a2", "h1")])) == (False, 2)

    def test_worked_example_after_decrease(self):
        instance = worked_example(2).apply_change(CapacityChange({"h2": -1}))
        matching = Matching.of(
            [("a1", "h1"), ("b", "h2"), ("a2", "h3"), ("a3", "h3"), ("a4", "h3")]
        )
        assert is_popular_cha(instance, matching) == (True, None)

    def test_edge_outside_reduced_graph(self):
        """Capacités d'origine : h3 n'est le second choix de personne"""
        matching = Matching.of(
            [("a1", "h1"), ("b", "h2"), ("a2", "h2"), ("a3", "h3"), ("a4", "h3")]
        )
        assert is_popular_cha(worked_example(2), matching) == (False, 1)

    def test_agrees_with_oracle(self):
        """Caractérisation et énumération s'accordent"""
        rng = random.Random(8)
        for _ in range(60):
            instance = random_instance(rng, rng.randint(1, 4), 3, 1, 2)
            oracle = PopularityOracle(instance, PopularityNotion.TRADITIONAL)
            for i in range(len(oracle)):
                popular, _ = is_popular_cha(instance, oracle.matching_at(i))
                assert popular == (oracle.dominator_index(i) is None)


class TestFindPopular:
    """Tests pour find_popular_cha"""

    def test_two_applicants(self):
        matching = find_popular_cha(_two_applicants())

        assert len(matching) == 2
        assert is_popular_cha(_two_applicants(), matching)[0]

    def test_single_house_admired_by_all(self):
        """Trois admirateurs, aucun second choix : un seul couplé"""
        instance = Instance.create({f"a{k}": ["h1"] for k in range(1, 4)}, {"h1": 1})
        matching = find_popular_cha(instance)

        assert len(matching) == 1
        assert matching.applicants_of("h1") <= {"a1", "a2", "a3"}
        assert is_popular_cha(instance, matching)[0]

    def test_no_popular_matching(self):
        """Trois demandeurs à listes identiques sur trois maisons de capacité 1"""
        instance = Instance.create(
            {f"a{k}": ["h1", "h2", "h3"] for k in range(1, 4)}, {"h1": 1, "h2": 1, "h3": 1}
        )
        assert find_popular_cha(instance) is None

    def test_agrees_with_oracle(self):
        rng = random.Random(9)
        for _ in range(80):
            instance = random_instance(rng, rng.randint(1, 4), 3, 1, 2)
            oracle = PopularityOracle(instance, PopularityNotion.TRADITIONAL)
            found = find_popular_cha(instance)

            if found is None:
                assert oracle.popular_indices() == []
            else:
                assert oracle.dominator_index(oracle.index_of(found)) is None


class TestPerfectPopular:
    """Tests pour exists_perfect_popular et le criblage par maisons"""

    def test_two_applicants(self):
        exists, matching = exists_perfect_popular(_two_applicants())

        assert exists
        assert is_perfect(_two_applicants(), matching)

    def test_worked_example(self):
        """Capacités d'origine : h1 et h2 n'offrent que 3 places pour 5 demandeurs"""
        assert exists_perfect_popular(worked_example(2)) == (False, None)

    def test_single_pair(self):
        assert exists_perfect_popular(Instance.create({"a": ["h"]}, {"h": 1}))[0]

    def test_empty_list(self):
        assert exists_perfect_popular(Instance.create({"a": []}, {"h": 1})) == (False, None)

    def test_agrees_with_oracle(self):
        """Un couplage populaire parfait existe ssi l'oracle en trouve un"""
        rng = random.Random(10)
        for _ in range(60):
            instance = random_instance(rng, rng.randint(1, 4), 3, 1, 3, empty_lists=False)
            oracle = PopularityOracle(instance, PopularityNotion.TRADITIONAL)
            expected = any(
                is_perfect(instance, oracle.matching_at(i)) for i in oracle.popular_indices()
            )
            assert exists_perfect_popular(instance)[0] == expected

    def test_screen_agrees(self):
        """Criblage par flot entre maisons et construction complète s'accordent"""
        rng = random.Random(12)
        for _ in range(300):
            instance = random_instance(rng, rng.randint(1, 6), rng.randint(1, 4), 1, 3)
            assert perfect_popular_possible(instance) == exists_perfect_popular(instance)[0]

    def test_screen_on_changed_capacities(self):
        """Le criblage évalue des capacités arbitraires, zéro compris"""
        rng = random.Random(14)
        for instance in structured_instances(3, 2, house_capacities=(1, 2)):
            screen = HouseLevelScreen(instance)
            capacities = [rng.randint(0, 3) for _ in instance.houses]
            changed = instance.with_house_capacities(dict(zip(instance.houses, capacities)))
            assert screen.fits(capacities) == exists_perfect_popular(changed)[0]


class TestConditionedMatching:
    """Tests pour max_conditioned_matching_size"""

    def test_worked_example(self):
        """Une place sur h1, deux sur h2 dont celle de b"""
        assert max_conditioned_matching_size(worked_example(2)) == 3

    def test_two_applicants(self):
        assert max_conditioned_matching_size(_two_applicants()) == 2

    def test_single_house(self):
        instance = Instance.create({f"a{k}": ["h1"] for k in range(1, 4)}, {"h1": 1})
        assert max_conditioned_matching_size(instance) == 1

    def test_increase_can_shrink(self):
        """Augmenter h d'une unité fait perdre un couplé"""
        prefs = {"u": ["h"], "b1": ["z", "h", "g"], "b2": ["z", "h", "g"], "b3": ["z", "h", "g"]}
        instance = Instance.create(prefs, {"z": 1, "h": 1, "g": 2})

        assert max_conditioned_matching_size(instance) == 4
        raised = instance.apply_change(CapacityChange({"h": 1}))
        assert max_conditioned_matching_size(raised) == 3


def _assert_characterisation_agrees(instance):
    oracle = PopularityOracle(instance, PopularityNotion.TRADITIONAL)
    for i in range(len(oracle)):
        popular, _ = is_popular_cha(instance, oracle.matching_at(i))
        assert popular == (oracle.dominator_index(i) is None)

    found = find_popular_cha(instance)
    if found is None:
        assert oracle.popular_indices() == []
    else:
        assert oracle.dominator_index(oracle.index_of(found)) is None


@pytest.mark.slow
class TestCharacterisationExhaustive:
    """Caractérisation, construction et oracle sur de larges familles"""

    def test_thousand_instances(self):
        rng = random.Random(2000)
        for _ in range(1000):
            instance = random_instance(rng, rng.randint(1, 4), rng.randint(1, 3), 1, 3)
            _assert_characterisation_agrees(instance)

    def test_structured_family(self):
        """Toutes les instances 3 x 2, capacités de maisons 1 à 3"""
        for instance in structured_instances(3, 2, house_capacities=(1, 2, 3)):
            _assert_characterisation_agrees(instance)

    def test_single_increment_gains_at_most_one(self):
        """+1 sur une maison : la taille conditionnée gagne au plus un couplé"""
        rng = random.Random(3000)
        for _ in range(500):
            instance = random_instance(rng, rng.randint(1, 6), rng.randint(1, 4), 1, 3)
            size = max_conditioned_matching_size(instance)
            for h in instance.houses:
                raised = instance.apply_change(CapacityChange({h: 1}))
                assert max_conditioned_matching_size(raised) - size <= 1

"""
Tests pour l'optimisation des changements de capacité
"""

import random

import pytest

from popcap.capopt import (
    Certificate,
    min_max_pareto_perfect,
    min_max_pop_perfect_exact,
    min_sum_pareto_perfect,
    min_sum_pop_perfect_exact,
    min_sum_pop_perfect_increase,
)
from popcap.chapop import exists_perfect_popular, is_popular_cha
from popcap.errors import ContractViolation, InfeasibleError, TooLargeError, UnsupportedRegime
from popcap.generators import random_instance, structured_instances, worked_example
from popcap.model import Instance, Matching, is_perfect
from popcap.pareto import maximum_matching_size
from popcap.votes import is_pareto_optimal_brute_force


def _crowded(n):
    """n demandeurs qui n'acceptent que h1, de capacité 1"""
    return Instance.create({f"a{k}": ["h1"] for k in range(1, n + 1)}, {"h1": 1})


def _assert_popular_perfect(instance, result):
    changed = instance.apply_change(result.change)
    assert is_popular_cha(changed, result.matching)[0]
    assert is_perfect(changed, result.matching)


def _assert_same_cost(instance):
    """Même coût minimum en augmentations seules, par les deux méthodes"""
    exact = min_sum_pop_perfect_exact(instance)
    if any(not p for p in instance.prefs.values()):
        assert exact is None
        with pytest.raises(InfeasibleError):
            min_sum_pop_perfect_increase(instance)
        return

    fast = min_sum_pop_perfect_increase(instance)
    assert fast.cost == exact.cost
    _assert_popular_perfect(instance, fast)


class TestMinSumIncrease:
    """Tests pour min_sum_pop_perfect_increase"""

    def test_already_feasible(self):
        instance = Instance.create({"a1": ["h1", "h2"], "a2": ["h1", "h2"]}, {"h1": 1, "h2": 2})
        result = min_sum_pop_perfect_increase(instance)

        assert result.cost == 0
        assert result.change.delta == {}
        assert result.certificate is Certificate.POLY_OPTIMAL

    def test_worked_example(self):
        """n = 2 : deux unités d'augmentation"""
        instance = worked_example(2)
        result = min_sum_pop_perfect_increase(instance)

        assert result.cost == 2
        _assert_popular_perfect(instance, result)

    def test_crowded_house(self):
        result = min_sum_pop_perfect_increase(_crowded(2))

        assert result.cost == 1
        assert result.change.delta == {"h1": 1}
        assert result.matching == Matching.of([("a1", "h1"), ("a2", "h1")])

    def test_empty_list(self):
        instance = Instance.create({"a": [], "b": ["h"]}, {"h": 1})
        with pytest.raises(InfeasibleError) as excinfo:
            min_sum_pop_perfect_increase(instance)
        assert excinfo.value.node == "a"

    def test_unit_applicants_required(self):
        instance = Instance.create({"a": ["h1", "h2"]}, {"h1": 1, "h2": 1}, {"a": 2})
        with pytest.raises(UnsupportedRegime):
            min_sum_pop_perfect_increase(instance)

    def test_document(self):
        instance = _crowded(2)
        document = min_sum_pop_perfect_increase(instance).to_document(instance)

        assert document == {
            "change": {"h1": 1},
            "matching": [["a1", "h1"], ["a2", "h1"]],
            "cost": 1,
            "certificate": "PolyOptimal",
        }


class TestExactSearch:
    """Tests pour les recherches exhaustives"""

    def test_worked_example_decrease(self):
        """Diminuer h2 d'une unité suffit"""
        instance = worked_example(2)
        result = min_sum_pop_perfect_exact(instance, budget=2, allow_decrease=True)

        assert result.cost == 1
        assert result.change.delta == {"h2": -1}
        assert result.certificate is Certificate.EXHAUSTIVE_OPTIMAL
        _assert_popular_perfect(instance, result)

    def test_worked_example_increase_only(self):
        result = min_sum_pop_perfect_exact(worked_example(2), budget=2)
        assert result.cost == 2

    def test_budget_too_small(self):
        assert min_sum_pop_perfect_exact(worked_example(2), budget=1) is None

    def test_negative_bounds_rejected(self):
        """Une borne négative est une erreur de l'appelant"""
        with pytest.raises(ContractViolation, match="budget"):
            min_sum_pop_perfect_exact(worked_example(2), budget=-1)
        with pytest.raises(ContractViolation, match="k_bound"):
            min_max_pop_perfect_exact(worked_example(2), k_bound=-1)

    def test_already_feasible(self):
        instance = Instance.create({"a": ["h"]}, {"h": 1})
        assert min_sum_pop_perfect_exact(instance).cost == 0
        assert min_max_pop_perfect_exact(instance).cost == 0

    def test_min_max_worked_example(self):
        instance = worked_example(2)
        result = min_max_pop_perfect_exact(instance)

        assert result.cost == 1
        assert result.change.linf == 1
        _assert_popular_perfect(instance, result)

    def test_search_space_guard(self):
        with pytest.raises(TooLargeError, match="too large for exact search"):
            min_sum_pop_perfect_exact(worked_example(2), allow_decrease=True, search_space=1)
        with pytest.raises(TooLargeError, match="too large for exact search"):
            min_max_pop_perfect_exact(worked_example(2), search_space=1)

    def test_empty_list_never_fits(self):
        instance = Instance.create({"a": [], "b": ["h"]}, {"h": 1})
        assert min_sum_pop_perfect_exact(instance) is None

    def test_increase_agrees_with_exact(self):
        """L'algorithme polynomial atteint l'optimum exhaustif"""
        rng = random.Random(21)
        for _ in range(40):
            instance = random_instance(rng, rng.randint(1, 4), 3, 1, 2, empty_lists=False)
            fast = min_sum_pop_perfect_increase(instance)
            exact = min_sum_pop_perfect_exact(instance)

            assert fast.cost == exact.cost
            _assert_popular_perfect(instance, exact)

    def test_decrease_never_costs_more(self):
        rng = random.Random(22)
        for _ in range(30):
            instance = random_instance(rng, rng.randint(1, 4), 3, 1, 2, empty_lists=False)
            increase = min_sum_pop_perfect_exact(instance)
            both = min_sum_pop_perfect_exact(instance, allow_decrease=True)

            assert both.cost <= increase.cost
            _assert_popular_perfect(instance, both)

    def test_min_max_below_min_sum(self):
        rng = random.Random(24)
        for _ in range(30):
            instance = random_instance(rng, rng.randint(1, 4), 3, 1, 2, empty_lists=False)
            for allow_decrease in (False, True):
                total = min_sum_pop_perfect_exact(instance, allow_decrease=allow_decrease)
                peak = min_max_pop_perfect_exact(instance, allow_decrease=allow_decrease)

                assert peak.cost <= total.cost
                assert peak.change.linf == peak.cost
                _assert_popular_perfect(instance, peak)

    def test_certified_matching_matches_solver(self):
        """Le couplage rapporté est celui de la construction complète"""
        instance = worked_example(3)
        result = min_sum_pop_perfect_exact(instance, allow_decrease=True)
        exists, matching = exists_perfect_popular(instance.apply_change(result.change))

        assert exists
        assert matching == result.matching


@pytest.mark.slow
class TestIncreaseAgainstExhaustive:
    """Algorithme polynomial et recherche exhaustive sur de larges familles"""

    def test_random_instances(self):
        rng = random.Random(500)
        for _ in range(500):
            applicants = rng.randint(1, 4)
            _assert_same_cost(random_instance(rng, applicants, rng.randint(1, 3), 1, 3))

    def test_structured_family(self):
        """Toutes les instances 3 x 2, capacités 1 ou 2"""
        for instance in structured_instances(3, 2, house_capacities=(1, 2)):
            _assert_same_cost(instance)


class TestParetoOptimisers:
    """Tests pour les changements Pareto-optimaux parfaits"""

    def test_min_sum_crowded(self):
        instance = _crowded(2)
        result = min_sum_pareto_perfect(instance)

        assert result.cost == 1
        assert result.change.delta == {"h1": 1}

    def test_min_sum_worked_example(self):
        """Un couplage parfait existe déjà"""
        assert min_sum_pareto_perfect(worked_example(2)).cost == 0

    def test_min_max_crowded(self):
        result = min_max_pareto_perfect(_crowded(3))

        assert result.cost == 2
        assert result.change.delta == {"h1": 2}

    def test_min_max_no_change(self):
        instance = Instance.create({"a1": ["h1", "h2"], "a2": ["h1", "h2"]}, {"h1": 1, "h2": 1})
        assert min_max_pareto_perfect(instance).cost == 0

    def test_min_max_empty_list(self):
        instance = Instance.create({"a": [], "b": ["h"]}, {"h": 1})
        with pytest.raises(InfeasibleError, match="no perfect matching"):
            min_max_pareto_perfect(instance)

    def test_random_instances(self):
        """Coûts |A| - x et k minimum ; résultats Pareto-optimaux et parfaits"""
        rng = random.Random(25)
        for _ in range(40):
            instance = random_instance(rng, rng.randint(1, 5), 3, 1, 2, empty_lists=False)
            n = len(instance.applicants)

            total = min_sum_pareto_perfect(instance)
            assert total.cost == n - maximum_matching_size(instance)

            peak = min_max_pareto_perfect(instance)
            for result in (total, peak):
                changed = instance.apply_change(result.change)
                assert is_perfect(changed, result.matching)
                assert is_pareto_optimal_brute_force(changed, result.matching)[0]
            if peak.cost:
                lower = instance.with_house_capacities(
                    {h: instance.house_capacity[h] + peak.cost - 1 for h in instance.houses}
                )
                assert maximum_matching_size(lower) < n

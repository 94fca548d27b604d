"""
Optimisation des changements de capacité

Quatre problèmes : rendre possible un couplage populaire parfait (somme ou
maximum des changements) et un couplage Pareto-optimal parfait (idem).
Le cas « somme, augmentations seules » et les deux problèmes Pareto sont
polynomiaux ; les autres sont NP-difficiles et résolus par recherche
exhaustive bornée.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence

from .chapop import HouseLevelScreen, conditioned_matching, exists_perfect_popular, is_popular_cha
from .errors import (
    ContractViolation,
    InfeasibleError,
    InternalInconsistency,
    TooLargeError,
    UnsupportedRegime,
)
from .model import CapacityChange, Instance, Matching, is_perfect
from .pareto import find_pareto_max, maximum_matching_size

logger = logging.getLogger("popcap.capopt")

SEARCH_SPACE_LIMIT = 10_000_000


class Certificate(str, Enum):
    POLY_OPTIMAL = "PolyOptimal"
    EXHAUSTIVE_OPTIMAL = "ExhaustiveOptimal"


@dataclass(frozen=True)
class OptimizationResult:
    """Vecteur de changement, couplage obtenu sous q + r, coût selon la norme du problème"""

    change: CapacityChange
    matching: Matching
    cost: int
    certificate: Certificate

    def to_document(self, instance: Instance) -> dict:
        return {
            "change": self.change.to_document(instance)["delta"],
            "matching": self.matching.to_document(instance)["edges"],
            "cost": self.cost,
            "certificate": self.certificate.value,
        }


def _require_unit_applicants(instance: Instance) -> None:
    if not instance.applicants_unit:
        raise UnsupportedRegime("capacity optimisation needs unit applicant capacities")


def _require_nonempty_lists(instance: Instance) -> None:
    for a in instance.applicants:
        if not instance.prefs[a]:
            raise InfeasibleError("applicant with an empty list can never be matched", node=a)


def _certify_popular_perfect(changed: Instance, matching: Matching) -> None:
    popular, failed = is_popular_cha(changed, matching)
    if not popular:
        raise InternalInconsistency(f"optimised matching violates condition {failed}")
    if not is_perfect(changed, matching):
        raise InternalInconsistency("optimised matching is not perfect")


# --------------------------------------------------------------------------
# Populaire et parfait, augmentations seules (polynomial)
# --------------------------------------------------------------------------


def min_sum_pop_perfect_increase(instance: Instance) -> OptimizationResult:
    """Coût minimum |r|_1 par augmentations pour un couplage populaire parfait

    Un couplage conditionné maximum M' de G' laisse |A| - |M'| demandeurs
    seuls ; chacun est envoyé à son premier choix, dont la capacité augmente
    de un. Une augmentation d'une capacité ne fait croître |M'| que de un au
    plus, d'où l'optimalité.
    """
    _require_unit_applicants(instance)
    _require_nonempty_lists(instance)

    graph, matching = conditioned_matching(instance)
    delta: Dict[str, int] = {}
    edges = set(matching.edges)
    for a in instance.applicants:
        if matching.houses_of(a):
            continue
        h = graph.first_choice[a]
        delta[h] = delta.get(h, 0) + 1
        edges.add((a, h))

    change = CapacityChange({h: delta[h] for h in instance.houses if h in delta})
    changed = instance.apply_change(change)
    result = Matching(frozenset(edges))
    _certify_popular_perfect(changed, result)

    logger.info("MinSum populaire (augmentations) : coût %d", change.l1)
    return OptimizationResult(change, result, change.l1, Certificate.POLY_OPTIMAL)


# --------------------------------------------------------------------------
# Recherche exhaustive
# --------------------------------------------------------------------------


def _allowed_deltas(
    instance: Instance, low: Dict[str, int], high: Dict[str, int]
) -> List[List[int]]:
    """Changements utiles par maison, croissants

    Une maison ne descend pas sous le nombre de demandeurs dont elle est
    l'unique choix. Au-delà de T = max(degré, admirateurs + 1) toutes les
    capacités se valent : on ne garde que la moins chère d'entre elles.
    """
    must = {h: 0 for h in instance.houses}
    admirers = {h: 0 for h in instance.houses}
    degree = {h: 0 for h in instance.houses}
    for a in instance.applicants:
        prefs = instance.prefs[a]
        if len(prefs) == 1:
            must[prefs[0]] += 1
        if prefs:
            admirers[prefs[0]] += 1
        for h in prefs:
            degree[h] += 1

    allowed = []
    for h in instance.houses:
        q = instance.house_capacity[h]
        plateau = max(degree[h], admirers[h] + 1)
        values = []
        for c in range(max(0, must[h], q + low[h]), q + high[h] + 1):
            if c > max(plateau, q):
                continue
            if plateau <= c < q:
                continue
            values.append(c - q)
        allowed.append(values)
    return allowed


def _count_by_cost(allowed: Sequence[Sequence[int]], budget: int) -> int:
    counts = [1] + [0] * budget
    for values in allowed:
        nxt = [0] * (budget + 1)
        for cost, n in enumerate(counts):
            if not n:
                continue
            for d in values:
                if cost + abs(d) <= budget:
                    nxt[cost + abs(d)] += n
        counts = nxt
    return sum(counts)


def _vectors_of_cost(allowed: Sequence[Sequence[int]], cost: int) -> Iterator[tuple]:
    """Vecteurs de norme 1 exactement ``cost``, en ordre lexicographique"""
    n = len(allowed)
    low = [min(abs(d) for d in values) if values else 0 for values in allowed]
    high = [max(abs(d) for d in values) if values else 0 for values in allowed]
    suffix_low = [0] * (n + 1)
    suffix_high = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_low[i] = suffix_low[i + 1] + low[i]
        suffix_high[i] = suffix_high[i + 1] + high[i]

    chosen: List[int] = []

    def walk(i: int, left: int):
        if i == n:
            if left == 0:
                yield tuple(chosen)
            return
        for d in allowed[i]:
            rest = left - abs(d)
            if rest < suffix_low[i + 1] or rest > suffix_high[i + 1]:
                continue
            chosen.append(d)
            yield from walk(i + 1, rest)
            chosen.pop()

    if all(allowed):
        yield from walk(0, cost)


def _certified_result(
    instance: Instance, vector: Sequence[int], cost: int
) -> OptimizationResult:
    change = CapacityChange({h: d for h, d in zip(instance.houses, vector) if d})
    changed = instance.apply_change(change)
    exists, matching = exists_perfect_popular(changed)
    if not exists:
        raise InternalInconsistency("screened candidate has no perfect popular matching")
    _certify_popular_perfect(changed, matching)
    return OptimizationResult(change, matching, cost, Certificate.EXHAUSTIVE_OPTIMAL)


def min_sum_pop_perfect_exact(
    instance: Instance,
    budget: Optional[int] = None,
    allow_decrease: bool = False,
    search_space: int = SEARCH_SPACE_LIMIT,
) -> Optional[OptimizationResult]:
    """Premier vecteur de coût |r|_1 minimum (<= budget) pour un couplage populaire parfait"""
    _require_unit_applicants(instance)
    budget = len(instance.applicants) if budget is None else budget
    if budget < 0:
        raise ContractViolation("budget must be non-negative")

    low = {h: (-instance.house_capacity[h] if allow_decrease else 0) for h in instance.houses}
    high = {h: budget for h in instance.houses}
    allowed = _allowed_deltas(instance, low, high)
    total = _count_by_cost(allowed, budget)
    if total > search_space:
        raise TooLargeError("instance too large for exact search")
    logger.debug("MinSum exhaustif : %d candidats au plus", total)

    screen = HouseLevelScreen(instance)
    base = [instance.house_capacity[h] for h in instance.houses]
    for cost in range(budget + 1):
        for vector in _vectors_of_cost(allowed, cost):
            if screen.fits([q + d for q, d in zip(base, vector)]):
                logger.info("MinSum populaire exhaustif : coût %d", cost)
                return _certified_result(instance, vector, cost)
    logger.info("MinSum populaire exhaustif : aucun vecteur de coût <= %d", budget)
    return None


def min_max_pop_perfect_exact(
    instance: Instance,
    k_bound: Optional[int] = None,
    allow_decrease: bool = False,
    search_space: int = SEARCH_SPACE_LIMIT,
) -> Optional[OptimizationResult]:
    """Plus petit k <= k_bound admettant un couplage populaire parfait avec |r|_inf <= k"""
    _require_unit_applicants(instance)
    k_bound = len(instance.applicants) if k_bound is None else k_bound
    if k_bound < 0:
        raise ContractViolation("k_bound must be non-negative")

    screen = HouseLevelScreen(instance)
    base = [instance.house_capacity[h] for h in instance.houses]
    for k in range(k_bound + 1):
        low = {
            h: (-min(instance.house_capacity[h], k) if allow_decrease else 0)
            for h in instance.houses
        }
        high = {h: k for h in instance.houses}
        allowed = _allowed_deltas(instance, low, high)
        size = 1
        for values in allowed:
            size *= len(values)
        if size > search_space:
            raise TooLargeError("instance too large for exact search")
        logger.debug("MinMax exhaustif, k = %d : %d candidats", k, size)

        for vector in itertools.product(*allowed):
            if max((abs(d) for d in vector), default=0) != k:
                continue
            if screen.fits([q + d for q, d in zip(base, vector)]):
                logger.info("MinMax populaire exhaustif : k = %d", k)
                return _certified_result(instance, vector, k)
    logger.info("MinMax populaire exhaustif : aucun k <= %d", k_bound)
    return None


# --------------------------------------------------------------------------
# Pareto-optimal et parfait
# --------------------------------------------------------------------------


def min_sum_pareto_perfect(instance: Instance) -> OptimizationResult:
    """Coût |A| - x, avec x la taille maximum d'un couplage

    Les diminutions n'aident jamais : un couplage Pareto-optimal de taille
    maximum existe toujours.
    """
    _require_unit_applicants(instance)
    _require_nonempty_lists(instance)

    maximum = find_pareto_max(instance)
    delta: Dict[str, int] = {}
    for a in instance.applicants:
        if not maximum.houses_of(a):
            h = instance.prefs[a][0]
            delta[h] = delta.get(h, 0) + 1

    change = CapacityChange({h: delta[h] for h in instance.houses if h in delta})
    changed = instance.apply_change(change)
    matching = find_pareto_max(changed)
    if not is_perfect(changed, matching):
        raise InternalInconsistency("Pareto matching after increases is not perfect")
    if change.l1 != len(instance.applicants) - len(maximum):
        raise InternalInconsistency("MinSum Pareto cost differs from |A| - x")

    logger.info("MinSum Pareto : coût %d", change.l1)
    return OptimizationResult(change, matching, change.l1, Certificate.POLY_OPTIMAL)


def min_max_pareto_perfect(instance: Instance) -> OptimizationResult:
    """Plus petit k tel que toutes les capacités augmentées de k admettent un couplage parfait

    Le vecteur rapporté est réduit à l'usage réel : r(h) = max(0, |M(h)| - q(h)).
    """
    _require_unit_applicants(instance)
    if any(not instance.prefs[a] for a in instance.applicants):
        raise InfeasibleError("no perfect matching even at k = |A|")

    n = len(instance.applicants)
    for k in range(n + 1):
        raised = instance.with_house_capacities(
            {h: instance.house_capacity[h] + k for h in instance.houses}
        )
        if maximum_matching_size(raised) == n:
            break
    else:
        raise InfeasibleError("no perfect matching even at k = |A|")

    matching = find_pareto_max(raised)
    if not is_perfect(raised, matching):
        raise InternalInconsistency("Pareto matching on the raised instance is not perfect")

    loads = matching.house_loads()
    change = CapacityChange(
        {
            h: loads.get(h, 0) - instance.house_capacity[h]
            for h in instance.houses
            if loads.get(h, 0) > instance.house_capacity[h]
        }
    )
    if change.linf != k:
        raise InternalInconsistency(f"trimmed change has norm {change.linf}, expected {k}")
    if not is_perfect(instance.apply_change(change), matching):
        raise InternalInconsistency("Pareto matching does not fit the trimmed capacities")

    logger.info("MinMax Pareto : k = %d", k)
    return OptimizationResult(change, matching, k, Certificate.POLY_OPTIMAL)

"""
Couplages Pareto-optimaux de taille maximum (demandeurs de capacité 1)

Un couplage de cardinalité maximum qui minimise la somme des rangs est
Pareto-optimal : un dominant couvrirait les mêmes demandeurs avec une somme
de rangs strictement plus petite.
"""

import logging
from dataclasses import dataclass
from typing import List

from .engine import WeightedBipartiteProblem, max_size_max_weight_matching
from .errors import UnsupportedRegime
from .model import Instance, Matching

logger = logging.getLogger("popcap.pareto")


@dataclass(frozen=True)
class RankedEdge:
    applicant: str
    house: str
    rank: int


def ranked_edges(instance: Instance) -> List[RankedEdge]:
    return [RankedEdge(a, h, instance.rank(a, h)) for a, h in instance.edges]


def find_pareto_max(instance: Instance) -> Matching:
    """Couplage de taille maximum et de somme des rangs minimum"""
    if not instance.applicants_unit:
        raise UnsupportedRegime("Pareto-optimal matchings need unit applicant capacities")

    problem = WeightedBipartiteProblem(
        left=instance.applicants,
        right=instance.houses,
        capacity=dict(instance.house_capacity),
        edges=tuple((e.applicant, e.house, -e.rank) for e in ranked_edges(instance)),
    )
    solution = max_size_max_weight_matching(problem)
    logger.debug("Couplage Pareto : taille %d, somme des rangs %d", solution.size, -solution.weight)
    return Matching.of(solution.edges)


def rank_sum(instance: Instance, matching: Matching) -> int:
    return sum(instance.rank(a, h) for a, h in matching.edges)


def maximum_matching_size(instance: Instance) -> int:
    """Cardinalité maximum, sans préférence de rang"""
    problem = WeightedBipartiteProblem(
        left=instance.applicants,
        right=instance.houses,
        capacity=dict(instance.house_capacity),
        edges=tuple((a, h, 0) for a, h in instance.edges),
    )
    return max_size_max_weight_matching(problem).size

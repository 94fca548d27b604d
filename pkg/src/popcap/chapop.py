"""
Allocation de maisons capacitaires (demandeurs de capacité 1)

Graphe réduit G' des premiers et seconds choix, caractérisation de la
popularité en quatre conditions, construction d'un couplage populaire et
existence d'un couplage populaire parfait.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .engine import WeightedBipartiteProblem, max_flow, max_size_max_weight_matching
from .errors import InfeasibleError, InternalInconsistency, UnsupportedRegime
from .model import Instance, Matching, is_perfect, require_feasible

logger = logging.getLogger("popcap.chapop")


@dataclass(frozen=True)
class ReducedGraph:
    """G' : arêtes f(a) et s(a), admirateurs et classes de maisons"""

    first_choice: Dict[str, Optional[str]]
    second_choice: Dict[str, Optional[str]]
    admirers: Dict[str, Tuple[str, ...]]
    edges: Tuple[Tuple[str, str], ...]
    saturable: FrozenSet[str]
    sub_admired: FrozenSet[str]

    def has_edge(self, a: str, h: str) -> bool:
        return h is not None and h in (self.first_choice.get(a), self.second_choice.get(a))

    def distinct_edges(self, instance: Instance) -> List[Tuple[str, str]]:
        distinct: List[Tuple[str, str]] = []
        for a in instance.applicants:
            for h in dict.fromkeys((self.first_choice[a], self.second_choice[a])):
                if h is not None:
                    distinct.append((a, h))
        return distinct


def _require_unit_applicants(instance: Instance) -> None:
    if not instance.applicants_unit:
        raise UnsupportedRegime("this algorithm needs unit applicant capacities")


def _second_choice(
    prefs: Sequence[str], first: str, admirers: Dict[str, int], capacity: Dict[str, int]
) -> Optional[str]:
    if admirers.get(first, 0) <= capacity[first]:
        return first
    for h in prefs:
        if admirers.get(h, 0) < capacity[h]:
            return h
    return None


def build_reduced_graph(instance: Instance) -> ReducedGraph:
    _require_unit_applicants(instance)

    first = {a: (p[0] if p else None) for a, p in instance.prefs.items()}
    admirers: Dict[str, List[str]] = {h: [] for h in instance.houses}
    for a in instance.applicants:
        if first[a] is not None:
            admirers[first[a]].append(a)
    counts = {h: len(admirers[h]) for h in instance.houses}
    capacity = instance.house_capacity

    second = {
        a: (
            None
            if first[a] is None
            else _second_choice(instance.prefs[a], first[a], counts, capacity)
        )
        for a in instance.applicants
    }

    edges = []
    for a in instance.applicants:
        if first[a] is not None:
            edges.append((a, first[a]))
        if second[a] is not None:
            edges.append((a, second[a]))

    # Lemme structurel : une maison sur-admirée ne reçoit que ses admirateurs
    for a, h in edges:
        if counts[h] > capacity[h] and first[a] != h:
            raise InternalInconsistency(f"edge ({a},{h}) enters an over-admired house")

    return ReducedGraph(
        first_choice=first,
        second_choice=second,
        admirers={h: tuple(admirers[h]) for h in instance.houses},
        edges=tuple(edges),
        saturable=frozenset(h for h in instance.houses if counts[h] >= capacity[h]),
        sub_admired=frozenset(h for h in instance.houses if counts[h] <= capacity[h]),
    )


def _failed_condition(instance: Instance, graph: ReducedGraph, matching: Matching) -> Optional[int]:
    for a, h in matching.edges:
        if not graph.has_edge(a, h):
            return 1

    for a in instance.applicants:
        if graph.second_choice[a] is not None and not matching.houses_of(a):
            return 2

    for h in instance.houses:
        if h in graph.saturable:
            holders = matching.applicants_of(h)
            if len(holders) != instance.house_capacity[h]:
                return 3
            if not holders <= set(graph.admirers[h]):
                return 3

    for h in instance.houses:
        if h in graph.sub_admired:
            holders = matching.applicants_of(h)
            if not set(graph.admirers[h]) <= holders:
                return 4

    return None


def is_popular_cha(instance: Instance, matching: Matching) -> Tuple[bool, Optional[int]]:
    """Popularité par caractérisation ; renvoie la première condition violée"""
    _require_unit_applicants(instance)
    require_feasible(instance, matching)
    failed = _failed_condition(instance, build_reduced_graph(instance), matching)
    return failed is None, failed


def _conditioned_problem(
    instance: Instance, graph: ReducedGraph, weighting: str
) -> WeightedBipartiteProblem:
    """Problème sur G' : admirateurs des sous-admirées fixés, saturables saturées"""
    edges = []
    for a, h in graph.distinct_edges(instance):
        if weighting == "degree":
            weight = 1 if graph.second_choice[a] is not None else 0
        else:
            weight = 1 if h in graph.saturable and graph.first_choice[a] == h else 0
        edges.append((a, h, weight))

    fixed = frozenset(
        (a, h) for h in instance.houses if h in graph.sub_admired for a in graph.admirers[h]
    )
    return WeightedBipartiteProblem(
        left=instance.applicants,
        right=instance.houses,
        capacity=dict(instance.house_capacity),
        edges=tuple(edges),
        fixed=fixed,
        saturated=graph.saturable,
    )


def _solve(instance: Instance, graph: ReducedGraph, weighting: str) -> Optional[Matching]:
    try:
        solution = max_size_max_weight_matching(_conditioned_problem(instance, graph, weighting))
    except InfeasibleError as e:
        logger.debug("Contraintes de G' irréalisables : %s", e)
        return None
    return Matching.of(solution.edges)


def find_popular_cha(instance: Instance) -> Optional[Matching]:
    """Un couplage populaire, ou None s'il n'en existe pas

    Les arêtes des demandeurs qui ont un second choix pèsent 1 : un couplage
    de taille puis de poids maximum les couple tous dès qu'un couplage
    conditionné le permet.
    """
    _require_unit_applicants(instance)
    graph = build_reduced_graph(instance)
    matching = _solve(instance, graph, "degree")
    if matching is None:
        return None

    stranded = [
        a
        for a in instance.applicants
        if graph.second_choice[a] is not None and not matching.houses_of(a)
    ]
    if stranded:
        logger.debug("Un demandeur à second choix reste seul : pas de couplage populaire")
        return None

    failed = _failed_condition(instance, graph, matching)
    if failed is not None:
        raise InternalInconsistency(f"constructed matching violates condition {failed}")
    return matching


def exists_perfect_popular(instance: Instance) -> Tuple[bool, Optional[Matching]]:
    """Existence d'un couplage populaire qui couvre tous les demandeurs"""
    _require_unit_applicants(instance)
    if any(not instance.prefs[a] for a in instance.applicants):
        return False, None

    graph = build_reduced_graph(instance)
    matching = _solve(instance, graph, "degree")
    if matching is None or len(matching) != len(instance.applicants):
        return False, None

    if _failed_condition(instance, graph, matching) is not None or not is_perfect(
        instance, matching
    ):
        raise InternalInconsistency("perfect matching on G' failed its own certification")
    return True, matching


def max_conditioned_matching_size(instance: Instance) -> int:
    """Taille maximum d'un couplage de G' qui sature les maisons saturables
    par des admirateurs et garde tous les admirateurs des maisons sous-admirées"""
    _require_unit_applicants(instance)
    graph = build_reduced_graph(instance)
    matching = _solve(instance, graph, "admirers")
    if matching is None:
        raise InternalInconsistency("admirer constraints of G' are always satisfiable")
    return len(matching)


def conditioned_matching(instance: Instance) -> Tuple[ReducedGraph, Matching]:
    """Couplage conditionné maximum (graphe réduit inclus)"""
    _require_unit_applicants(instance)
    graph = build_reduced_graph(instance)
    matching = _solve(instance, graph, "admirers")
    if matching is None:
        raise InternalInconsistency("admirer constraints of G' are always satisfiable")
    return graph, matching


# --------------------------------------------------------------------------
# Criblage rapide au niveau des maisons
# --------------------------------------------------------------------------


class HouseLevelScreen:
    """Test d'existence d'un couplage populaire parfait pour des capacités données

    Les premiers choix ne dépendent pas des capacités. Pour un vecteur de
    capacités, chaque maison sur-admirée doit renvoyer ``admirateurs - capacité``
    de ses admirateurs vers leur second choix, dans la place libre des maisons
    strictement sous-admirées : un flot maximum entre maisons suffit.
    """

    def __init__(self, instance: Instance):
        _require_unit_applicants(instance)
        hi = instance.house_index
        self.n_houses = len(instance.houses)
        self.prefs = [tuple(hi[h] for h in instance.prefs[a]) for a in instance.applicants]
        self.blocked = any(not p for p in self.prefs)
        self.admirers = [0] * self.n_houses
        self.first = []
        for p in self.prefs:
            if p:
                self.admirers[p[0]] += 1
                self.first.append(p[0])

    def fits(self, capacity: Sequence[int]) -> bool:
        if self.blocked:
            return False
        adm = self.admirers
        over = [h for h in range(self.n_houses) if adm[h] > capacity[h]]
        if not over:
            return True

        # diverted[(h, u)] : admirateurs de h dont le second choix est u
        diverted: Dict[Tuple[int, int], int] = {}
        for p in self.prefs:
            h = p[0]
            if adm[h] <= capacity[h]:
                continue
            target = next((u for u in p if adm[u] < capacity[u]), None)
            if target is not None:
                diverted[(h, target)] = diverted.get((h, target), 0) + 1

        demand = {h: adm[h] - capacity[h] for h in over}
        spare = {}
        for (_h, u) in diverted:
            spare[u] = capacity[u] - adm[u]
        return _transport(demand, diverted, spare) == sum(demand.values())


def _transport(
    demand: Dict[int, int], links: Dict[Tuple[int, int], int], spare: Dict[int, int]
) -> int:
    """Flot maximum source -> maisons sur-admirées -> maisons d'accueil -> puits"""
    source, sink = ("s",), ("t",)
    arcs = [(source, ("o", h), d) for h, d in demand.items()]
    arcs += [(("o", h), ("u", u), c) for (h, u), c in links.items()]
    arcs += [(("u", u), sink, c) for u, c in spare.items()]
    return max_flow(arcs, source, sink)


def perfect_popular_possible(instance: Instance) -> bool:
    """Équivalent rapide de ``exists_perfect_popular(instance)[0]``"""
    screen = HouseLevelScreen(instance)
    return screen.fits([instance.house_capacity[h] for h in instance.houses])

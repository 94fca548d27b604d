"""
Vérification polynomiale de la popularité traditionnelle
(demandeurs capacitaires, maisons de capacité 1)

Chaque demandeur est cloné en autant de copies que sa capacité. Un couplage
est impopulaire si et seulement si le graphe auxiliaire orienté contient un
cycle alterné de poids négatif ou un chemin alterné admissible de score négatif.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .engine import (
    Arc,
    DirectedWeightedGraph,
    NegativeCycle,
    shortest_paths_or_negative_cycle,
)
from .errors import InternalInconsistency, UnsupportedRegime
from .model import (
    Instance,
    Matching,
    PopularityNotion,
    count_matchings,
    iter_edge_index_sets,
    require_feasible,
)
from .votes import ENUMERATION_LIMIT, total_vote

logger = logging.getLogger("popcap.popverify")

Copy = Tuple[str, str, int]
HouseNode = Tuple[str, str]

_SOURCE = ("src",)


def copy_node(a: str, l: int) -> Copy:
    return ("c", a, l)


def house_node(h: str) -> HouseNode:
    return ("h", h)


@dataclass(frozen=True)
class AuxiliaryGraph:
    """Graphe G^M : copies de demandeurs, maisons, arcs orientés pondérés

    Un arc copie -> maison porte une arête du couplage (poids 0) ; un arc
    maison -> copie porte une arête hors couplage, pondérée par le vote de la
    copie entre sa maison actuelle et la nouvelle.
    """

    copies: Dict[str, Tuple[Copy, ...]]
    houses: Tuple[HouseNode, ...]
    arcs: Tuple[Arc, ...]
    matched_house: Dict[Copy, Optional[str]]

    @property
    def nodes(self) -> Tuple:
        return tuple(c for cs in self.copies.values() for c in cs) + self.houses

    def graph(
        self, extra: Tuple[Arc, ...] = (), with_source: bool = False
    ) -> DirectedWeightedGraph:
        nodes = self.nodes + ((_SOURCE,) if with_source else ())
        return DirectedWeightedGraph(nodes, extra + self.arcs)

    def exposed(self, c: Copy) -> bool:
        return self.matched_house[c] is None


@dataclass(frozen=True)
class DominationWitness:
    kind: str
    arcs: Tuple[Arc, ...]
    score: int
    induced_matching: Matching
    dominates: bool = True


def _require_regime(instance: Instance) -> None:
    if not instance.houses_unit:
        raise UnsupportedRegime("polynomial popularity verification needs unit house capacities")


def build_auxiliary_graph(instance: Instance, matching: Matching) -> AuxiliaryGraph:
    """Construit G^M ; la k-ième arête de M(a) en ordre de préférence va à la copie k"""
    _require_regime(instance)
    require_feasible(instance, matching)

    copies: Dict[str, Tuple[Copy, ...]] = {}
    matched_house: Dict[Copy, Optional[str]] = {}
    arcs: List[Arc] = []

    for a in instance.applicants:
        held = sorted(matching.houses_of(a), key=lambda h: instance.rank(a, h))
        cs = tuple(copy_node(a, l) for l in range(1, instance.applicant_capacity[a] + 1))
        copies[a] = cs
        for l, c in enumerate(cs):
            matched_house[c] = held[l] if l < len(held) else None
            if matched_house[c] is not None:
                arcs.append(Arc(c, house_node(held[l]), 0, ("match", a, held[l])))

    for a in instance.applicants:
        held = matching.houses_of(a)
        for h in instance.prefs[a]:
            if h in held:
                continue
            for c in copies[a]:
                g = matched_house[c]
                weight = 1 if g is not None and instance.prefers(a, g, h) else -1
                arcs.append(Arc(house_node(h), c, weight, ("gain", a, h)))

    return AuxiliaryGraph(
        copies=copies,
        houses=tuple(house_node(h) for h in instance.houses),
        arcs=tuple(arcs),
        matched_house=matched_house,
    )


def induced_matching(matching: Matching, arcs: Tuple[Arc, ...]) -> Matching:
    """Échange les arêtes du couplage le long d'un chemin ou d'un cycle alterné"""
    edges = set(matching.edges)
    for arc in arcs:
        if arc.tag is None:
            continue
        kind, a, h = arc.tag
        if kind == "match":
            edges.discard((a, h))
        else:
            edges.add((a, h))
    return Matching(frozenset(edges))


def _start_classes(aux: AuxiliaryGraph, free_houses: List[HouseNode]):
    """Maisons libres (poids 0), puis copies couplées de chaque demandeur (+1)"""
    yield None, tuple(Arc(_SOURCE, h, 0) for h in free_houses)
    for a, cs in aux.copies.items():
        starts = tuple(Arc(_SOURCE, c, 1) for c in cs if not aux.exposed(c))
        if starts:
            yield a, starts


def _best_path(
    aux: AuxiliaryGraph, literal_mod: bool, free_houses: List[HouseNode], matched: List[HouseNode]
) -> Optional[Tuple[int, List[Arc]]]:
    for owner, starts in _start_classes(aux, free_houses):
        result = shortest_paths_or_negative_cycle(aux.graph(starts, with_source=True), [_SOURCE])
        if isinstance(result, NegativeCycle):
            raise InternalInconsistency("negative cycle through the virtual source")

        best: Optional[Tuple[int, object]] = None
        ends: List[Tuple[object, int]] = [(h, 0) for h in matched]
        for a, cs in aux.copies.items():
            if a == owner:
                # extrémités du même demandeur : couvertes par un cycle
                continue
            for c in cs:
                if aux.exposed(c):
                    ends.append((c, -1 if literal_mod else 0))
        for node, bonus in ends:
            if node not in result.distance:
                continue
            path = result.path_to(node)
            if len(path) < 2:
                continue
            score = result.distance[node] + bonus
            if best is None or score < best[0]:
                best = (score, node)
        if best is not None and best[0] < 0:
            path = result.path_to(best[1])
            return best[0], [arc for arc in path if arc.tail != _SOURCE]
    return None


def verify_popular_poly(
    instance: Instance, matching: Matching, literal_mod: bool = False
) -> Tuple[bool, Optional[DominationWitness]]:
    """Popularité traditionnelle en temps polynomial

    ``literal_mod`` remplace le score corrigé des chemins par la formule
    littérale (bonus supplémentaire -1 sur une copie exposée en fin de chemin) ;
    c'est un mode de diagnostic dont les témoins peuvent ne pas dominer.
    """
    aux = build_auxiliary_graph(instance, matching)

    cycle = shortest_paths_or_negative_cycle(aux.graph(), aux.nodes)
    if isinstance(cycle, NegativeCycle):
        witness = _witness(instance, matching, "cycle", cycle.arcs, cycle.weight, literal_mod)
        return False, witness

    loads = matching.house_loads()
    free = [house_node(h) for h in instance.houses if loads.get(h, 0) == 0]
    taken = [house_node(h) for h in instance.houses if loads.get(h, 0) > 0]

    found = _best_path(aux, literal_mod, free, taken)
    if found is None:
        return True, None
    score, arcs = found
    return False, _witness(instance, matching, "path", tuple(arcs), score, literal_mod)


def _witness(
    instance: Instance,
    matching: Matching,
    kind: str,
    arcs: Tuple[Arc, ...],
    score: int,
    literal_mod: bool,
) -> DominationWitness:
    other = induced_matching(matching, arcs)
    require_feasible(instance, other)
    outcome = total_vote(instance, matching, other, PopularityNotion.TRADITIONAL)
    dominates = outcome.total < 0
    if not dominates:
        if not literal_mod:
            raise InternalInconsistency(
                f"{kind} of score {score} induces a matching with total vote {outcome.total}"
            )
        logger.warning("Score littéral %d : le couplage induit ne domine pas", score)
    logger.debug("Témoin %s de score %d", kind, score)
    return DominationWitness(kind, arcs, score, other, dominates)


def is_maximal(instance: Instance, matching: Matching) -> bool:
    """Aucune arête acceptable libre des deux côtés"""
    loads = matching.house_loads()
    for a in instance.applicants:
        held = matching.houses_of(a)
        if len(held) >= instance.applicant_capacity[a]:
            continue
        for h in instance.prefs[a]:
            if h not in held and loads.get(h, 0) < instance.house_capacity[h]:
                return False
    return True


def find_popular_matching(
    instance: Instance, limit: int = ENUMERATION_LIMIT
) -> Optional[Matching]:
    """Premier couplage populaire en ordre canonique, ou None

    Seuls les couplages maximaux sont candidats : ajouter une arête libre
    donne un vote total de -1.
    """
    _require_regime(instance)
    count_matchings(instance, limit)

    edges = instance.edges
    examined = 0
    for chosen in iter_edge_index_sets(instance):
        candidate = Matching(frozenset(edges[k] for k in chosen))
        if not is_maximal(instance, candidate):
            continue
        examined += 1
        popular, _ = verify_popular_poly(instance, candidate)
        if popular:
            logger.debug("Couplage populaire trouvé après %d candidats maximaux", examined)
            return candidate
    logger.debug("Aucun couplage populaire parmi %d candidats maximaux", examined)
    return None

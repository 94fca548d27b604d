"""
Sémantique des votes (traditionnelle et lexicographique), dominance et oracles
par force brute servant de vérité terrain au reste de la bibliothèque
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import AbstractSet, Dict, List, Optional, Tuple

import numpy as np

from .engine import WeightedBipartiteProblem, max_size_max_weight_matching
from .errors import ContractViolation, InternalInconsistency, TooLargeError, UnsupportedRegime
from .model import (
    Instance,
    Matching,
    PopularityNotion,
    count_matchings,
    iter_edge_index_sets,
    require_feasible,
)
from .utils import chunk_ranges

logger = logging.getLogger("popcap.votes")

PAIRING_THRESHOLD = 6
ENUMERATION_LIMIT = 1_000_000
OPTION_SEARCH_LIMIT = 5_000_000


@dataclass(frozen=True)
class FeasiblePairing:
    """Appariement entre S\\T et T\\S pour un demandeur : paires (maison perdue, maison gagnée)"""

    pairs: Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class VoteOutcome:
    per_applicant: Dict[str, int]
    total: int


def _check_pairing(S: AbstractSet[str], T: AbstractSet[str], N: FeasiblePairing) -> None:
    lost, gained = S - T, T - S
    if len(N.pairs) != min(len(lost), len(gained)):
        raise ContractViolation("pairing must have min(|S\\T|, |T\\S|) pairs")
    xs = [x for x, _ in N.pairs]
    ys = [y for _, y in N.pairs]
    if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
        raise ContractViolation("pairing reuses an edge")
    if not set(xs) <= lost or not set(ys) <= gained:
        raise ContractViolation("pairing must pair S\\T with T\\S")


def pairing_vote(
    instance: Instance, a: str, S: AbstractSet[str], T: AbstractSet[str], N: FeasiblePairing
) -> int:
    """Vote de ``a`` pour S contre T selon l'appariement N"""
    for h in set(S) | set(T):
        if not instance.acceptable(a, h):
            raise ContractViolation(f"house {h} is not acceptable to {a}")
    S, T = frozenset(S), frozenset(T)
    _check_pairing(S, T, N)

    better = sum(1 for x, y in N.pairs if instance.prefers(a, x, y))
    worse = len(N.pairs) - better
    return better - worse + len(S - T) - len(T - S)


def _min_pairing_enumerated(instance: Instance, a: str, lost: List[str], gained: List[str]) -> int:
    best: Optional[int] = None
    if len(lost) <= len(gained):
        for image in itertools.permutations(gained, len(lost)):
            score = sum(1 if instance.prefers(a, x, y) else -1 for x, y in zip(lost, image))
            best = score if best is None else min(best, score)
    else:
        for image in itertools.permutations(lost, len(gained)):
            score = sum(1 if instance.prefers(a, x, y) else -1 for x, y in zip(image, gained))
            best = score if best is None else min(best, score)
    return best


def _min_pairing_assignment(instance: Instance, a: str, lost: List[str], gained: List[str]) -> int:
    """Appariement le pire pour S par affectation de poids maximum sur -score"""
    small, large, lost_is_small = (
        (lost, gained, True) if len(lost) <= len(gained) else (gained, lost, False)
    )

    def score(x: str, y: str) -> int:
        return 1 if instance.prefers(a, x, y) else -1

    edges = []
    for u in small:
        for v in large:
            x, y = (u, v) if lost_is_small else (v, u)
            edges.append((("s", u), ("l", v), -score(x, y)))
    problem = WeightedBipartiteProblem(
        left=tuple(("s", u) for u in small),
        right=tuple(("l", v) for v in large),
        capacity={("l", v): 1 for v in large},
        edges=tuple(edges),
    )
    solution = max_size_max_weight_matching(problem)
    if solution.size != len(small):
        raise InternalInconsistency("assignment did not pair the smaller side")
    return -solution.weight


def vote_traditional(
    instance: Instance,
    a: str,
    M: Matching,
    M2: Matching,
    threshold: int = PAIRING_THRESHOLD,
    method: str = "auto",
) -> int:
    """Vote de ``a`` : minimum sur tous les appariements faisables

    ``method`` vaut ``auto``, ``enumerate`` ou ``assignment``.
    """
    S, T = M.houses_of(a), M2.houses_of(a)
    rank = instance.house_index
    lost = sorted(S - T, key=rank.__getitem__)
    gained = sorted(T - S, key=rank.__getitem__)
    if not lost and not gained:
        return 0

    k = min(len(lost), len(gained))
    if k == 0:
        paired = 0
    elif method == "enumerate" or (method == "auto" and k <= threshold):
        paired = _min_pairing_enumerated(instance, a, lost, gained)
    elif method in ("assignment", "auto"):
        paired = _min_pairing_assignment(instance, a, lost, gained)
    else:
        raise ContractViolation(f"unknown pairing method {method!r}")
    return paired + len(lost) - len(gained)


def vote_lex(instance: Instance, a: str, M: Matching, M2: Matching) -> int:
    """+1 si la meilleure maison de la différence symétrique est dans M(a), -1 si dans M2(a)"""
    S, T = M.houses_of(a), M2.houses_of(a)
    diff = S ^ T
    if not diff:
        return 0
    best = min(diff, key=lambda h: instance.rank(a, h))
    return 1 if best in S else -1


def total_vote(
    instance: Instance,
    M: Matching,
    M2: Matching,
    notion: PopularityNotion,
    threshold: int = PAIRING_THRESHOLD,
) -> VoteOutcome:
    """Votes de tous les demandeurs ; M2 domine M si le total est négatif"""
    per_applicant = {}
    for a in instance.applicants:
        if notion == PopularityNotion.TRADITIONAL:
            per_applicant[a] = vote_traditional(instance, a, M, M2, threshold)
        else:
            per_applicant[a] = vote_lex(instance, a, M, M2)
    return VoteOutcome(per_applicant, sum(per_applicant.values()))


# --------------------------------------------------------------------------
# Oracle vectorisé
# --------------------------------------------------------------------------


def _vote_between_sets(
    instance: Instance,
    a: str,
    S: frozenset,
    T: frozenset,
    notion: PopularityNotion,
    threshold: int,
) -> int:
    M = Matching(frozenset((a, h) for h in S))
    M2 = Matching(frozenset((a, h) for h in T))
    if notion == PopularityNotion.TRADITIONAL:
        return vote_traditional(instance, a, M, M2, threshold)
    return vote_lex(instance, a, M, M2)


class PopularityOracle:
    """Énumère une fois tous les couplages et compare par tables de votes

    Pour chaque demandeur, les couplages sont projetés sur l'ensemble de maisons
    qu'ils lui attribuent ; une ligne de dominance est alors une somme de
    recherches dans de petites tables.
    """

    def __init__(
        self,
        instance: Instance,
        notion: PopularityNotion = PopularityNotion.TRADITIONAL,
        limit: int = ENUMERATION_LIMIT,
        threshold: int = PAIRING_THRESHOLD,
        workers: int = 1,
    ):
        self.instance = instance
        self.notion = PopularityNotion(notion)
        self.workers = max(1, workers)

        count_matchings(instance, limit)
        self.matchings: List[Tuple[int, ...]] = list(iter_edge_index_sets(instance))
        self.position = {m: i for i, m in enumerate(self.matchings)}

        ai = instance.applicant_index
        edge_owner = [ai[a] for a, _ in instance.edges]
        n_applicants = len(instance.applicants)

        # projection de chaque couplage sur chaque demandeur
        projections: List[Dict[Tuple[int, ...], int]] = [{} for _ in instance.applicants]
        self.codes = np.zeros((len(self.matchings), n_applicants), dtype=np.int64)
        for row, chosen in enumerate(self.matchings):
            parts: List[List[int]] = [[] for _ in range(n_applicants)]
            for k in chosen:
                parts[edge_owner[k]].append(k)
            for col, part in enumerate(parts):
                seen = projections[col]
                self.codes[row, col] = seen.setdefault(tuple(part), len(seen))

        self.tables: List[np.ndarray] = []
        for col, a in enumerate(instance.applicants):
            subsets = [
                frozenset(instance.edges[k][1] for k in key) for key in projections[col]
            ]
            table = np.array(
                [
                    [_vote_between_sets(instance, a, S, T, self.notion, threshold) for T in subsets]
                    for S in subsets
                ],
                dtype=np.int64,
            ).reshape(len(subsets), len(subsets))
            self.tables.append(table)

        logger.debug(
            "Oracle : %d couplages, %d demandeurs, notion %s",
            len(self.matchings),
            n_applicants,
            self.notion.value,
        )

    def __len__(self) -> int:
        return len(self.matchings)

    def matching_at(self, index: int) -> Matching:
        edges = self.instance.edges
        return Matching(frozenset(edges[k] for k in self.matchings[index]))

    def index_of(self, matching: Matching) -> int:
        require_feasible(self.instance, matching)
        lookup = {e: k for k, e in enumerate(self.instance.edges)}
        return self.position[tuple(sorted(lookup[e] for e in matching.edges))]

    def totals(self, index: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """Votes totaux du couplage ``index`` contre les couplages [start, stop)"""
        stop = len(self.matchings) if stop is None else stop
        row = self.codes[index]
        block = self.codes[start:stop]
        result = np.zeros(stop - start, dtype=np.int64)
        for col, table in enumerate(self.tables):
            result += table[row[col], block[:, col]]
        return result

    def _first_negative(self, index: int, start: int, stop: int) -> Optional[int]:
        hits = np.flatnonzero(self.totals(index, start, stop) < 0)
        return start + int(hits[0]) if hits.size else None

    def dominator_index(self, index: int) -> Optional[int]:
        """Indice canonique du premier couplage qui domine, ou None"""
        if self.workers == 1:
            return self._first_negative(index, 0, len(self.matchings))

        ranges = list(chunk_ranges(len(self.matchings), self.workers))
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            found = pool.map(lambda r: self._first_negative(index, *r), ranges)
            hits = [i for i in found if i is not None]
        return min(hits) if hits else None

    def is_popular(self, matching: Matching) -> Tuple[bool, Optional[Matching]]:
        dominator = self.dominator_index(self.index_of(matching))
        if dominator is None:
            return True, None
        return False, self.matching_at(dominator)

    def popular_indices(self) -> List[int]:
        return [i for i in range(len(self.matchings)) if self.dominator_index(i) is None]


def is_popular_brute_force(
    instance: Instance,
    matching: Matching,
    notion: PopularityNotion = PopularityNotion.TRADITIONAL,
    limit: int = ENUMERATION_LIMIT,
    threshold: int = PAIRING_THRESHOLD,
    workers: int = 1,
) -> Tuple[bool, Optional[Matching]]:
    """Popularité par énumération complète ; le témoin est le premier dominant canonique"""
    require_feasible(instance, matching)
    oracle = PopularityOracle(instance, notion, limit, threshold, workers)
    return oracle.is_popular(matching)


def is_pareto_optimal_brute_force(
    instance: Instance, matching: Matching, limit: int = ENUMERATION_LIMIT
) -> Tuple[bool, Optional[Matching]]:
    """Optimalité de Pareto par énumération (demandeurs de capacité 1 uniquement)"""
    if not instance.applicants_unit:
        raise UnsupportedRegime("Pareto-domination is defined for unit applicant capacities")
    require_feasible(instance, matching)

    count_matchings(instance, limit)
    ai = instance.applicant_index
    unmatched = np.array([len(instance.prefs[a]) + 1 for a in instance.applicants])

    def ranks(edges) -> np.ndarray:
        r = unmatched.copy()
        for a, h in edges:
            r[ai[a]] = instance.rank(a, h)
        return r

    edges = instance.edges
    candidates = list(iter_edge_index_sets(instance))
    R = np.stack([ranks(edges[k] for k in chosen) for chosen in candidates])
    base = ranks(matching.edges)

    dominated = np.all(R <= base, axis=1) & np.any(R < base, axis=1)
    hits = np.flatnonzero(dominated)
    if hits.size == 0:
        return True, None
    first = candidates[int(hits[0])]
    return False, Matching(frozenset(edges[k] for k in first))


# --------------------------------------------------------------------------
# Recherche de dominant lexicographique par options
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Option:
    houses: frozenset
    vote: int


def _options(instance: Instance, a: str, held: frozenset) -> List[_Option]:
    """Conserver, améliorer à une maison h (garder les maisons au-dessus de h), abandonner"""
    options = [_Option(held, 0)]
    for h in instance.prefs[a]:
        if h in held:
            continue
        above = frozenset(g for g in held if instance.prefers(a, g, h))
        if len(above) + 1 <= instance.applicant_capacity[a]:
            options.append(_Option(above | {h}, -1))
    if held:
        options.append(_Option(frozenset(), 1))
    return options


def find_lex_dominator(
    instance: Instance, matching: Matching, node_limit: int = OPTION_SEARCH_LIMIT
) -> Optional[Matching]:
    """Cherche un couplage qui domine ``matching`` au sens lexicographique

    Tout dominant se ramène, demandeur par demandeur et sans changer aucun vote,
    à un dominant où chacun conserve son ensemble, l'abandonne entièrement, ou
    garde ses maisons meilleures qu'une maison gagnée h et prend h. La recherche
    parcourt ces options avec contrôle des charges et borne sur le vote.
    """
    require_feasible(instance, matching)

    held = {a: matching.houses_of(a) for a in instance.applicants}
    choices = {a: _options(instance, a, held[a]) for a in instance.applicants}
    improvable = {a for a, opts in choices.items() if any(o.vote < 0 for o in opts)}
    order = [a for a in instance.applicants if a not in improvable] + [
        a for a in instance.applicants if a in improvable
    ]
    # improvers_after[i] : demandeurs améliorables à partir de la position i
    improvers_after = [0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        improvers_after[i] = improvers_after[i + 1] + (order[i] in improvable)

    capacity = instance.house_capacity
    load = {h: 0 for h in instance.houses}
    picked: List[_Option] = []
    nodes = 0

    def descend(i: int, score: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise TooLargeError("instance too large for lexicographic dominance search")
        if score - improvers_after[i] >= 0:
            return False
        if i == len(order):
            return True
        for option in choices[order[i]]:
            if any(load[h] + 1 > capacity[h] for h in option.houses):
                continue
            for h in option.houses:
                load[h] += 1
            picked.append(option)
            if descend(i + 1, score + option.vote):
                return True
            picked.pop()
            for h in option.houses:
                load[h] -= 1
        return False

    if not descend(0, 0):
        logger.debug("Aucun dominant lexicographique (%d nœuds)", nodes)
        return None

    witness = Matching(
        frozenset((a, h) for a, option in zip(order, picked) for h in option.houses)
    )
    if total_vote(instance, matching, witness, PopularityNotion.LEXICOGRAPHIC).total >= 0:
        raise InternalInconsistency("lexicographic search produced a non-dominating matching")
    return witness


def is_popular_lex_search(
    instance: Instance, matching: Matching, node_limit: int = OPTION_SEARCH_LIMIT
) -> Tuple[bool, Optional[Matching]]:
    witness = find_lex_dominator(instance, matching, node_limit)
    return witness is None, witness

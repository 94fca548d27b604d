"""
Réductions de NP-difficulté : problèmes sources, oracles et générateurs

Problèmes sources : 3DM restreint (chaque élément dans exactement trois
triplets) et Set Cover. Chaque construction produit une instance du problème
cible ; les témoins (couplage, vecteur de capacités) décrits par les
preuves sont reconstruits pour vérifier empiriquement les équivalences.

Numérotation des éléments de 3DM : e_1..e_n = a_1..a_n, e_{n+1}..e_{2n} =
b_1..b_n, e_{2n+1}..e_{3n} = c_1..c_n. Les triplets et couvertures sont
désignés par leur position (à partir de 0) dans la liste d'entrée.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import StrictBool, StrictInt

from .capopt import SEARCH_SPACE_LIMIT, min_max_pop_perfect_exact, min_sum_pop_perfect_exact
from .chapop import is_popular_cha
from .errors import ContractViolation, TooLargeError, ValidationError
from .model import (
    CapacityChange,
    Instance,
    Matching,
    StrictSchema,
    dump_canonical,
    is_perfect,
    load_document,
)
from .popverify import find_popular_matching
from .votes import (
    ENUMERATION_LIMIT,
    OPTION_SEARCH_LIMIT,
    find_lex_dominator,
    is_popular_brute_force,
)

logger = logging.getLogger("popcap.reductions")

Triple = Tuple[int, int, int]

SET_COVER_LIMIT = 1_000_000


class Construction(str, Enum):
    PMCAP_TRADITIONAL = "pmcap-trad"
    PMCAP_LEX = "pmcap-lex"
    MINSUM_DECREASE = "minsum-dec"
    MINMAX_DECREASE_K1 = "minmax-dec1"
    MINMAX_INCREASE_K2 = "minmax-inc2"
    SETCOVER_MINMAX = "setcover-minmax"


class MinMaxVariant(str, Enum):
    DECREASE_K1 = "DecreaseK1"
    INCREASE_K2 = "IncreaseK2"


# --------------------------------------------------------------------------
# Problèmes sources
# --------------------------------------------------------------------------


class ThreeDMSchema(StrictSchema):
    nHat: StrictInt
    triples: List[Tuple[StrictInt, StrictInt, StrictInt]]
    strict: StrictBool = True


class SetCoverSchema(StrictSchema):
    nElements: StrictInt
    sets: List[List[StrictInt]]
    k: Optional[StrictInt] = None


@dataclass(frozen=True)
class ThreeDMInstance:
    """Triplets (a, b, c) d'indices dans [1, n_hat]"""

    n_hat: int
    triples: Tuple[Triple, ...]
    strict: bool = True

    def __post_init__(self) -> None:
        if self.n_hat < 1:
            raise ValidationError("nHat must be positive", str(self.n_hat))
        for j, triple in enumerate(self.triples):
            if any(not 1 <= x <= self.n_hat for x in triple):
                raise ValidationError("triple index out of range", f"triple {j}")
        if not self.strict:
            return
        if len(self.triples) != 3 * self.n_hat:
            raise ValidationError("strict 3DM needs exactly 3*nHat triples", str(len(self.triples)))
        for i in range(1, 3 * self.n_hat + 1):
            occurrences = sum(i in self.elements(j) for j in range(len(self.triples)))
            if occurrences != 3:
                raise ValidationError("element must occur in exactly 3 triples", f"e{i}")

    def elements(self, j: int) -> Triple:
        """Éléments e_i (à partir de 1) du triplet j, dans l'ordre croissant"""
        a, b, c = self.triples[j]
        return (a, self.n_hat + b, 2 * self.n_hat + c)

    def to_document(self) -> dict:
        return {
            "nHat": self.n_hat,
            "triples": [list(t) for t in self.triples],
            "strict": self.strict,
        }

    def serialize(self) -> str:
        return dump_canonical(self.to_document())


@dataclass(frozen=True)
class SetCoverInstance:
    """Ensembles d'éléments de [1, n_elements] ; ``k`` est une cible facultative"""

    n_elements: int
    sets: Tuple[Tuple[int, ...], ...]
    k: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_elements < 1:
            raise ValidationError("nElements must be positive", str(self.n_elements))
        covered = set()
        for j, s in enumerate(self.sets):
            if not s:
                raise ValidationError("empty set", f"set {j}")
            if len(set(s)) != len(s):
                raise ValidationError("repeated element in set", f"set {j}")
            if any(not 1 <= e <= self.n_elements for e in s):
                raise ValidationError("element out of range", f"set {j}")
            covered.update(s)
        missing = set(range(1, self.n_elements + 1)) - covered
        if missing:
            raise ValidationError("element not covered by any set", f"e{min(missing)}")

    def to_document(self) -> dict:
        doc = {"nElements": self.n_elements, "sets": [sorted(s) for s in self.sets]}
        if self.k is not None:
            doc["k"] = self.k
        return doc

    def serialize(self) -> str:
        return dump_canonical(self.to_document())


def parse_3dm(text: str) -> ThreeDMInstance:
    doc = load_document(text, ThreeDMSchema)
    return ThreeDMInstance(doc.nHat, tuple(tuple(t) for t in doc.triples), doc.strict)


def parse_set_cover(text: str) -> SetCoverInstance:
    doc = load_document(text, SetCoverSchema)
    return SetCoverInstance(doc.nElements, tuple(tuple(sorted(s)) for s in doc.sets), doc.k)


# --------------------------------------------------------------------------
# Oracles
# --------------------------------------------------------------------------


def oracle_exact_cover(t: ThreeDMInstance) -> Optional[Tuple[int, ...]]:
    """Première couverture exacte (ordre lexicographique des indices), ou None"""
    masks = []
    for j in range(len(t.triples)):
        mask = 0
        for e in t.elements(j):
            mask |= 1 << (e - 1)
        masks.append(mask)
    universe = (1 << (3 * t.n_hat)) - 1
    chosen: List[int] = []

    def descend(start: int, covered: int) -> bool:
        if len(chosen) == t.n_hat:
            return covered == universe
        for j in range(start, len(masks)):
            if not masks[j] & covered:
                chosen.append(j)
                if descend(j + 1, covered | masks[j]):
                    return True
                chosen.pop()
        return False

    return tuple(chosen) if descend(0, 0) else None


def oracle_set_cover(
    s: SetCoverInstance, limit: int = SET_COVER_LIMIT
) -> Tuple[int, Tuple[int, ...]]:
    """Couverture de cardinalité minimum, par tailles croissantes"""
    masks = []
    for subset in s.sets:
        mask = 0
        for e in subset:
            mask |= 1 << (e - 1)
        masks.append(mask)
    universe = (1 << s.n_elements) - 1

    examined = 0
    for size in range(1, len(masks) + 1):
        for combo in itertools.combinations(range(len(masks)), size):
            examined += 1
            if examined > limit:
                raise TooLargeError("set cover instance too large for exhaustive search")
            covered = 0
            for j in combo:
                covered |= masks[j]
            if covered == universe:
                return size, combo
    raise ContractViolation("set cover instance has no cover")


# --------------------------------------------------------------------------
# Générateurs : PM-cap
# --------------------------------------------------------------------------


def _element_houses(t: ThreeDMInstance) -> Dict[str, int]:
    n = t.n_hat
    return {f"{kind}{i}": 1 for kind in "abc" for i in range(1, n + 1)}


def reduce_3dm_to_pmcap_traditional(t: ThreeDMInstance) -> Instance:
    """Un demandeur s_j de capacité 3 par triplet, classant c, puis b, puis a"""
    prefs = {f"s{j + 1}": (f"c{c}", f"b{b}", f"a{a}") for j, (a, b, c) in enumerate(t.triples)}
    capacity = {s: 3 for s in prefs}
    return Instance.create(prefs, _element_houses(t), capacity)


def pmcap_traditional_witness(t: ThreeDMInstance, cover: Sequence[int]) -> Matching:
    """Les demandeurs de la couverture prennent leurs trois maisons, les autres rien"""
    edges = []
    for j in cover:
        a, b, c = t.triples[j]
        edges.extend((f"s{j + 1}", h) for h in (f"a{a}", f"b{b}", f"c{c}"))
    return Matching.of(edges)


def _lex_names(j: int, ell: int) -> Tuple[str, str, str]:
    successor = ell % 3 + 1
    return f"s{j + 1}_{ell}", f"h{j + 1}_{ell}", f"h{j + 1}_{successor}"


def reduce_3dm_to_pmcap_lex(t: ThreeDMInstance) -> Instance:
    """Trois demandeurs de capacité 2 et trois maisons propres par triplet

    s_j^l classe h_j^l, puis son élément (a, b ou c selon l), puis h_j^{l+1}.
    """
    houses = _element_houses(t)
    prefs: Dict[str, Tuple[str, ...]] = {}
    for j, triple in enumerate(t.triples):
        for ell in (1, 2, 3):
            houses[f"h{j + 1}_{ell}"] = 1
        for ell, (kind, index) in enumerate(zip("abc", triple), start=1):
            applicant, own, successor = _lex_names(j, ell)
            prefs[applicant] = (own, f"{kind}{index}", successor)
    capacity = {a: 2 for a in prefs}
    return Instance.create(prefs, houses, capacity)


def pmcap_lex_witness(t: ThreeDMInstance, cover: Sequence[int]) -> Matching:
    chosen = set(cover)
    edges = []
    for j, triple in enumerate(t.triples):
        for ell, (kind, index) in enumerate(zip("abc", triple), start=1):
            applicant, own, _ = _lex_names(j, ell)
            edges.append((applicant, own))
            if j in chosen:
                edges.append((applicant, f"{kind}{index}"))
    return Matching.of(edges)


# --------------------------------------------------------------------------
# Générateurs : changements de capacité
# --------------------------------------------------------------------------


def reduce_3dm_to_min_sum_dec(t: ThreeDMInstance) -> Tuple[Instance, int]:
    """Maisons e_i, t_j, p_j, q_j, x_j ; budget 2n ; x_j de capacité 1"""
    houses = {f"e{i}": 1 for i in range(1, 3 * t.n_hat + 1)}
    prefs: Dict[str, Tuple[str, ...]] = {}
    for j in range(len(t.triples)):
        n = j + 1
        houses.update({f"t{n}": 3, f"p{n}": 2, f"q{n}": 1, f"x{n}": 1})
        for ell, e in enumerate(t.elements(j), start=1):
            prefs[f"s{n}_{ell}"] = (f"e{e}", f"p{n}", f"t{n}")
        prefs[f"a{n}"] = (f"q{n}", f"p{n}", f"x{n}")
        prefs[f"q{n}'"] = (f"q{n}",)
        prefs[f"p{n}'"] = (f"p{n}",)
    return Instance.create(prefs, houses), 2 * t.n_hat


def min_sum_dec_witness(
    t: ThreeDMInstance, cover: Sequence[int]
) -> Tuple[CapacityChange, Matching]:
    chosen = set(cover)
    delta = {}
    edges = []
    for j in range(len(t.triples)):
        n = j + 1
        if j in chosen:
            edges.extend((f"s{n}_{ell}", f"e{e}") for ell, e in enumerate(t.elements(j), start=1))
            edges.append((f"a{n}", f"p{n}"))
        else:
            delta[f"p{n}"] = -1
            edges.extend((f"s{n}_{ell}", f"t{n}") for ell in (1, 2, 3))
            edges.append((f"a{n}", f"x{n}"))
        edges.append((f"p{n}'", f"p{n}"))
        edges.append((f"q{n}'", f"q{n}"))
    return CapacityChange(delta), Matching.of(edges)


def reduce_3dm_to_min_max(t: ThreeDMInstance, variant: MinMaxVariant) -> Tuple[Instance, int]:
    """Construction commune aux deux cas MinMax, avec la maison collectrice x

    DecreaseK1 : p_j de capacité 2, x de capacité 2n - 1, un mannequin par e_i,
    deux par q_j. IncreaseK2 : p_j de capacité 1, x de capacité 2n - 2, deux
    mannequins par e_i, trois par q_j.
    """
    increase = variant is MinMaxVariant.INCREASE_K2
    e_dummies = 2 if increase else 1
    q_dummies = 3 if increase else 2

    houses = {f"e{i}": 1 for i in range(1, 3 * t.n_hat + 1)}
    prefs: Dict[str, Tuple[str, ...]] = {}
    for i in range(1, 3 * t.n_hat + 1):
        for d in range(1, e_dummies + 1):
            prefs[_e_dummy(i, d, increase)] = (f"e{i}",)
    for j in range(len(t.triples)):
        n = j + 1
        houses.update({f"t{n}": 4, f"p{n}": 1 if increase else 2, f"q{n}": 1})
        e1, e2, e3 = t.elements(j)
        for ell, e in enumerate((e1, e2, e3, e3), start=1):
            prefs[f"s{n}_{ell}"] = (f"e{e}", f"p{n}", f"t{n}")
        prefs[f"a{n}"] = (f"q{n}", f"p{n}", "x")
        for d in range(1, q_dummies + 1):
            prefs[f"q{n}_{d}"] = (f"q{n}",)
        prefs[f"p{n}'"] = (f"p{n}",)
    houses["x"] = 2 * t.n_hat - (2 if increase else 1)

    instance = Instance.create(prefs, houses, allow_empty_houses=True)
    if houses["x"] == 0:
        logger.debug("Maison collectrice de capacité 0 (n = %d)", t.n_hat)
    return instance, (2 if increase else 1)


def _e_dummy(i: int, d: int, numbered: bool) -> str:
    return f"e{i}_{d}" if numbered else f"e{i}'"


def min_max_witness(
    t: ThreeDMInstance, cover: Sequence[int], variant: MinMaxVariant
) -> Tuple[CapacityChange, Matching]:
    increase = variant is MinMaxVariant.INCREASE_K2
    step = 2 if increase else 1
    e_dummies = 2 if increase else 1
    q_dummies = 3 if increase else 2
    chosen = set(cover)

    delta = {f"e{i}": step for i in range(1, 3 * t.n_hat + 1)}
    edges = []
    for i in range(1, 3 * t.n_hat + 1):
        edges.extend((_e_dummy(i, d, increase), f"e{i}") for d in range(1, e_dummies + 1))
    for j in range(len(t.triples)):
        n = j + 1
        if j in chosen:
            delta[f"p{n}"] = step
            edges.extend((f"s{n}_{ell}", f"e{e}") for ell, e in enumerate(t.elements(j), start=1))
            edges.append((f"s{n}_4", f"p{n}"))
            edges.append((f"a{n}", f"p{n}"))
        else:
            if not increase:
                delta[f"p{n}"] = -1
            edges.extend((f"s{n}_{ell}", f"t{n}") for ell in (1, 2, 3, 4))
            edges.append((f"a{n}", "x"))
        delta[f"q{n}"] = step
        edges.extend((f"q{n}_{d}", f"q{n}") for d in range(1, q_dummies + 1))
        edges.append((f"p{n}'", f"p{n}"))
    delta["x"] = step
    return CapacityChange(delta), Matching.of(edges)


def set_cover_scale(s: SetCoverInstance, n_scale: Optional[int] = None) -> int:
    if n_scale is not None:
        if n_scale < 1:
            raise ContractViolation("nScale must be at least 1")
        return n_scale
    return s.n_elements ** 2 * len(s.sets)


def _ranked_sets(s: SetCoverInstance) -> Dict[int, List[Tuple[int, int]]]:
    """Pour chaque élément, les couples (j, l) où il est le l-ième plus petit de S_j"""
    ranked: Dict[int, List[Tuple[int, int]]] = {e: [] for e in range(1, s.n_elements + 1)}
    for j, subset in enumerate(s.sets):
        for ell, e in enumerate(sorted(subset), start=1):
            ranked[e].append((j, ell))
    return ranked


def reduce_set_cover_to_min_max(s: SetCoverInstance, n_scale: Optional[int] = None) -> Instance:
    """Maisons s_j^l, w_j, f, x^l et leurs mannequins ; N = n^2 m sauf ``n_scale``"""
    big = set_cover_scale(s, n_scale)
    houses: Dict[str, int] = {}
    prefs: Dict[str, Tuple[str, ...]] = {}

    for i, pairs in _ranked_sets(s).items():
        prefs[f"e{i}"] = ("f",) + tuple(f"s{j + 1}_{ell}" for j, ell in pairs)
    prefs["f'"] = ("f",)
    for j, subset in enumerate(s.sets):
        n = j + 1
        row = tuple(f"s{n}_{ell}" for ell in range(1, len(subset) + 1))
        for h in row:
            houses[h] = 1
        houses[f"w{n}"] = big
        for ell in range(1, len(subset) + 1):
            prefs[f"t{n}_{ell}"] = (f"s{n}_{ell}",)
        for ell in range(1, big + 1):
            prefs[f"a{n}_{ell}"] = (f"x{ell}",) + row + (f"w{n}",)
    houses["f"] = 1
    for ell in range(1, big + 1):
        houses[f"x{ell}"] = 1
        prefs[f"y{ell}"] = (f"x{ell}",)
    return Instance.create(prefs, houses)


def set_cover_witness(
    s: SetCoverInstance, cover: Sequence[int], n_scale: Optional[int] = None
) -> Tuple[CapacityChange, Matching]:
    """r = 1 sur les s_j^l choisis, r = k sur chaque x^l"""
    big = set_cover_scale(s, n_scale)
    chosen = set(cover)
    k = len(chosen)
    delta: Dict[str, int] = {}
    edges = [("f'", "f")]

    for j, subset in enumerate(s.sets):
        n = j + 1
        for ell in range(1, len(subset) + 1):
            if j in chosen:
                delta[f"s{n}_{ell}"] = 1
            edges.append((f"t{n}_{ell}", f"s{n}_{ell}"))
        for ell in range(1, big + 1):
            edges.append((f"a{n}_{ell}", f"x{ell}" if j in chosen else f"w{n}"))
    for ell in range(1, big + 1):
        if k:
            delta[f"x{ell}"] = k
        edges.append((f"y{ell}", f"x{ell}"))

    for i, pairs in _ranked_sets(s).items():
        best = next(((j, ell) for j, ell in pairs if j in chosen), None)
        if best is None:
            raise ContractViolation(f"cover misses element e{i}")
        edges.append((f"e{i}", f"s{best[0] + 1}_{best[1]}"))
    return CapacityChange(delta), Matching.of(edges)


# --------------------------------------------------------------------------
# Validation des réductions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionReport:
    """Réponse du problème source, réponse du problème cible, accord

    ``target_answer`` vaut None quand seule la direction directe est vérifiable.
    """

    construction: Construction
    source_answer: Union[bool, int]
    target_answer: Optional[bool]
    agree: Optional[bool]
    witness_valid: Optional[bool] = None
    details: Dict[str, object] = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "construction": self.construction.value,
            "sourceAnswer": self.source_answer,
            "targetAnswer": self.target_answer,
            "agree": self.agree,
            "witnessValid": self.witness_valid,
            "details": self.details,
        }


def _certifies(instance: Instance, change: CapacityChange, matching: Matching) -> bool:
    changed = instance.apply_change(change)
    popular, failed = is_popular_cha(changed, matching)
    if not popular:
        logger.debug("Témoin refusé : condition %s", failed)
    return popular and is_perfect(changed, matching)


def _validate_3dm(
    t: ThreeDMInstance, construction: Construction, limit: int, search_space: int, node_limit: int
) -> ReductionReport:
    cover = oracle_exact_cover(t)
    has_cover = cover is not None
    details: Dict[str, object] = {"cover": list(cover) if has_cover else None}
    witness_valid: Optional[bool] = None

    if construction is Construction.PMCAP_TRADITIONAL:
        instance = reduce_3dm_to_pmcap_traditional(t)
        target = find_popular_matching(instance, limit) is not None
        if has_cover:
            witness = pmcap_traditional_witness(t, cover)
            witness_valid = is_popular_brute_force(instance, witness, limit=limit)[0]

    elif construction is Construction.PMCAP_LEX:
        instance = reduce_3dm_to_pmcap_lex(t)
        target = None
        if has_cover:
            witness = pmcap_lex_witness(t, cover)
            witness_valid = find_lex_dominator(instance, witness, node_limit) is None
            target = witness_valid

    elif construction is Construction.MINSUM_DECREASE:
        instance, budget = reduce_3dm_to_min_sum_dec(t)
        result = min_sum_pop_perfect_exact(instance, budget, True, search_space)
        target = result is not None
        details["budget"] = budget
        details["cost"] = None if result is None else result.cost
        if has_cover:
            witness_valid = _certifies(instance, *min_sum_dec_witness(t, cover))

    else:
        variant = (
            MinMaxVariant.INCREASE_K2
            if construction is Construction.MINMAX_INCREASE_K2
            else MinMaxVariant.DECREASE_K1
        )
        instance, k = reduce_3dm_to_min_max(t, variant)
        allow_decrease = variant is MinMaxVariant.DECREASE_K1
        result = min_max_pop_perfect_exact(instance, k, allow_decrease, search_space)
        target = result is not None
        details["kTarget"] = k
        details["cost"] = None if result is None else result.cost
        if has_cover:
            witness_valid = _certifies(instance, *min_max_witness(t, cover, variant))

    agree = None if target is None else target == has_cover
    return ReductionReport(construction, has_cover, target, agree, witness_valid, details)


def validate_reduction(
    source: Union[ThreeDMInstance, SetCoverInstance],
    construction: Construction,
    limit: int = ENUMERATION_LIMIT,
    search_space: int = SEARCH_SPACE_LIMIT,
    node_limit: int = OPTION_SEARCH_LIMIT,
    n_scale: Optional[int] = None,
) -> ReductionReport:
    """Confronte la réponse de l'oracle source à celle du problème construit"""
    if construction is Construction.SETCOVER_MINMAX:
        if not isinstance(source, SetCoverInstance):
            raise ContractViolation("set cover construction needs a set cover instance")
        optimum, cover = oracle_set_cover(source)
        instance = reduce_set_cover_to_min_max(source, n_scale)
        change, matching = set_cover_witness(source, cover, n_scale)
        valid = _certifies(instance, change, matching) and change.linf == optimum
        report = ReductionReport(
            construction,
            optimum,
            valid,
            valid,
            valid,
            {"cover": list(cover), "scale": set_cover_scale(source, n_scale)},
        )
    else:
        if not isinstance(source, ThreeDMInstance):
            raise ContractViolation(f"{construction.value} needs a 3DM instance")
        if not source.strict and construction is not Construction.PMCAP_LEX:
            logger.warning("3DM relâché : la direction réciproque n'est qu'indicative")
        report = _validate_3dm(source, construction, limit, search_space, node_limit)

    logger.info(
        "Réduction %s : source %s, cible %s, accord %s",
        construction.value,
        report.source_answer,
        report.target_answer,
        report.agree,
    )
    return report

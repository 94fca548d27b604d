"""
Modèle de données : instances, couplages, vecteurs de changement de capacité

Les identifiants sont des chaînes opaques. Tous les ordres déterministes
(énumération, départage) suivent l'ordre de déclaration, jamais l'ordre alphabétique.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, StrictInt, StrictStr
from pydantic import ValidationError as SchemaError

from .errors import ContractViolation, ParseError, TooLargeError, ValidationError

logger = logging.getLogger("popcap.model")

Edge = Tuple[str, str]


class PopularityNotion(str, Enum):
    """Sémantique de vote utilisée pour comparer deux couplages"""

    TRADITIONAL = "traditional"
    LEXICOGRAPHIC = "lex"


# --------------------------------------------------------------------------
# Schémas de fichiers
# --------------------------------------------------------------------------


class StrictSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ApplicantSchema(StrictSchema):
    id: StrictStr
    capacity: StrictInt
    prefs: List[StrictStr]


class HouseSchema(StrictSchema):
    id: StrictStr
    capacity: StrictInt


class InstanceSchema(StrictSchema):
    applicants: List[ApplicantSchema]
    houses: List[HouseSchema]


class MatchingSchema(StrictSchema):
    edges: List[Tuple[StrictStr, StrictStr]]


class CapacityChangeSchema(StrictSchema):
    delta: Dict[StrictStr, StrictInt]


def load_document(text: str, schema: type) -> BaseModel:
    """JSON puis schéma ; les erreurs portent la ligne ou le champ fautif"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", line=e.lineno) from e

    try:
        return schema.model_validate(data)
    except SchemaError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or None
        raise ParseError(f"malformed document: {first['msg']}", field=location) from e


def dump_canonical(document: dict) -> str:
    """Sérialisation JSON compacte, clés dans l'ordre du schéma"""
    return json.dumps(document, separators=(",", ":"), ensure_ascii=False)


# --------------------------------------------------------------------------
# Instance
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """Marché biparti : demandeurs à préférences strictes, maisons à capacités"""

    applicants: Tuple[str, ...]
    houses: Tuple[str, ...]
    prefs: Mapping[str, Tuple[str, ...]]
    applicant_capacity: Mapping[str, int]
    house_capacity: Mapping[str, int]

    def __post_init__(self) -> None:
        self._check_identifiers(self.applicants, "applicant")
        self._check_identifiers(self.houses, "house")
        known = set(self.houses)

        for a in self.applicants:
            if a not in self.prefs:
                raise ValidationError("missing preference list", a)
            seen = set()
            for h in self.prefs[a]:
                if h not in known:
                    raise ValidationError("unknown house in preferences", f"{a} -> {h}")
                if h in seen:
                    raise ValidationError("duplicate house in preferences", f"{a} -> {h}")
                seen.add(h)
            capacity = self.applicant_capacity.get(a)
            if not isinstance(capacity, int) or capacity < 1:
                raise ValidationError("applicant capacity must be at least 1", a)

        for h in self.houses:
            capacity = self.house_capacity.get(h)
            if not isinstance(capacity, int) or capacity < 0:
                raise ValidationError("house capacity must be non-negative", h)

    @staticmethod
    def _check_identifiers(ids: Tuple[str, ...], kind: str) -> None:
        seen = set()
        for x in ids:
            if x in seen:
                raise ValidationError(f"duplicate {kind} identifier", x)
            seen.add(x)

    @classmethod
    def create(
        cls,
        prefs: Mapping[str, Iterable[str]],
        house_capacity: Mapping[str, int],
        applicant_capacity: Optional[Mapping[str, int]] = None,
        allow_empty_houses: bool = False,
    ) -> "Instance":
        """Construit une instance ; l'ordre des dictionnaires fixe l'ordre de déclaration"""
        applicant_capacity = applicant_capacity or {}
        instance = cls(
            applicants=tuple(prefs),
            houses=tuple(house_capacity),
            prefs={a: tuple(p) for a, p in prefs.items()},
            applicant_capacity={a: applicant_capacity.get(a, 1) for a in prefs},
            house_capacity=dict(house_capacity),
        )
        if not allow_empty_houses:
            instance.require_positive_capacities()
        return instance

    def require_positive_capacities(self) -> None:
        for h in self.houses:
            if self.house_capacity[h] < 1:
                raise ValidationError("house capacity must be at least 1", h)

    # -- index et rangs -----------------------------------------------------

    @cached_property
    def applicant_index(self) -> Dict[str, int]:
        return {a: i for i, a in enumerate(self.applicants)}

    @cached_property
    def house_index(self) -> Dict[str, int]:
        return {h: i for i, h in enumerate(self.houses)}

    @cached_property
    def _ranks(self) -> Dict[str, Dict[str, int]]:
        return {a: {h: r for r, h in enumerate(p, start=1)} for a, p in self.prefs.items()}

    def rank(self, a: str, h: str) -> int:
        """Position (à partir de 1) de h dans la liste de a"""
        return self._ranks[a][h]

    def acceptable(self, a: str, h: str) -> bool:
        return h in self._ranks.get(a, {})

    def prefers(self, a: str, h: str, g: str) -> bool:
        """Vrai si a préfère strictement h à g"""
        return self._ranks[a][h] < self._ranks[a][g]

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        """Arêtes acceptables dans l'ordre canonique (demandeur, maison)"""
        hi = self.house_index
        return tuple(
            (a, h) for a in self.applicants for h in sorted(self.prefs[a], key=hi.__getitem__)
        )

    @property
    def applicants_unit(self) -> bool:
        return all(self.applicant_capacity[a] == 1 for a in self.applicants)

    @property
    def houses_unit(self) -> bool:
        return all(self.house_capacity[h] == 1 for h in self.houses)

    def acceptors(self, h: str) -> List[str]:
        return [a for a in self.applicants if h in self._ranks[a]]

    # -- dérivations --------------------------------------------------------

    def with_house_capacities(self, capacities: Mapping[str, int]) -> "Instance":
        merged = dict(self.house_capacity)
        merged.update(capacities)
        return Instance(
            applicants=self.applicants,
            houses=self.houses,
            prefs=self.prefs,
            applicant_capacity=self.applicant_capacity,
            house_capacity=merged,
        )

    def apply_change(self, change: "CapacityChange") -> "Instance":
        change.validate_for(self)
        return self.with_house_capacities(
            {h: self.house_capacity[h] + d for h, d in change.delta.items()}
        )

    # -- E/S ----------------------------------------------------------------

    def to_document(self) -> dict:
        return {
            "applicants": [
                {"id": a, "capacity": self.applicant_capacity[a], "prefs": list(self.prefs[a])}
                for a in self.applicants
            ],
            "houses": [{"id": h, "capacity": self.house_capacity[h]} for h in self.houses],
        }

    def serialize(self) -> str:
        return dump_canonical(self.to_document())


def parse_instance(text: str) -> Instance:
    """Lit un document d'instance canonique"""
    doc = load_document(text, InstanceSchema)

    houses = tuple(h.id for h in doc.houses)
    for h in doc.houses:
        if h.capacity < 1:
            raise ValidationError("house capacity must be at least 1", h.id)
    for a in doc.applicants:
        if a.capacity < 1:
            raise ValidationError("applicant capacity must be at least 1", a.id)

    instance = Instance(
        applicants=tuple(a.id for a in doc.applicants),
        houses=houses,
        prefs={a.id: tuple(a.prefs) for a in doc.applicants},
        applicant_capacity={a.id: a.capacity for a in doc.applicants},
        house_capacity={h.id: h.capacity for h in doc.houses},
    )
    logger.debug(
        "Instance lue : %d demandeurs, %d maisons", len(instance.applicants), len(instance.houses)
    )
    return instance


# --------------------------------------------------------------------------
# Couplages
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Matching:
    """Ensemble d'arêtes (demandeur, maison)"""

    edges: FrozenSet[Edge] = field(default_factory=frozenset)

    @classmethod
    def of(cls, edges: Iterable[Edge]) -> "Matching":
        return cls(frozenset((a, h) for a, h in edges))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges)

    def houses_of(self, a: str) -> FrozenSet[str]:
        return frozenset(h for x, h in self.edges if x == a)

    def applicants_of(self, h: str) -> FrozenSet[str]:
        return frozenset(a for a, y in self.edges if y == h)

    def house_loads(self) -> Dict[str, int]:
        loads: Dict[str, int] = {}
        for _, h in self.edges:
            loads[h] = loads.get(h, 0) + 1
        return loads

    def sorted_edges(self, instance: Instance) -> List[Edge]:
        ai, hi = instance.applicant_index, instance.house_index
        return sorted(self.edges, key=lambda e: (ai.get(e[0], -1), hi.get(e[1], -1)))

    def to_document(self, instance: Instance) -> dict:
        return {"edges": [[a, h] for a, h in self.sorted_edges(instance)]}

    def serialize(self, instance: Instance) -> str:
        return dump_canonical(self.to_document(instance))


def matching_violation(instance: Instance, matching: Matching) -> Optional[str]:
    """Première raison d'infaisabilité, ou None si le couplage est faisable"""
    applicant_load: Dict[str, int] = {}
    house_load: Dict[str, int] = {}

    for a, h in matching.sorted_edges(instance):
        if a not in instance.applicant_index:
            return f"unknown applicant {a}"
        if h not in instance.house_index:
            return f"unknown house {h}"
        if not instance.acceptable(a, h):
            return f"edge ({a},{h}) is not acceptable"
        applicant_load[a] = applicant_load.get(a, 0) + 1
        house_load[h] = house_load.get(h, 0) + 1

    for a, load in applicant_load.items():
        if load > instance.applicant_capacity[a]:
            return f"applicant {a} over capacity"
    for h, load in house_load.items():
        if load > instance.house_capacity[h]:
            return f"house {h} over capacity"
    return None


def is_feasible(instance: Instance, matching: Matching) -> bool:
    return matching_violation(instance, matching) is None


def validate_matching(instance: Instance, matching: Matching) -> Matching:
    reason = matching_violation(instance, matching)
    if reason is not None:
        raise ValidationError("infeasible matching", reason)
    return matching


def require_feasible(instance: Instance, matching: Matching) -> None:
    reason = matching_violation(instance, matching)
    if reason is not None:
        raise ContractViolation(f"infeasible matching: {reason}")


def parse_matching(text: str, instance: Optional[Instance] = None) -> Matching:
    doc = load_document(text, MatchingSchema)
    pairs = [tuple(e) for e in doc.edges]
    if len(set(pairs)) != len(pairs):
        raise ValidationError("duplicate edge in matching")
    matching = Matching.of(pairs)
    if instance is not None:
        validate_matching(instance, matching)
    return matching


def is_perfect(instance: Instance, matching: Matching) -> bool:
    """Vrai si chaque demandeur est saturé"""
    require_feasible(instance, matching)
    counts: Dict[str, int] = {}
    for a, _ in matching.edges:
        counts[a] = counts.get(a, 0) + 1
    return all(counts.get(a, 0) == instance.applicant_capacity[a] for a in instance.applicants)


# --------------------------------------------------------------------------
# Changements de capacité
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CapacityChange:
    """Vecteur r de changement de capacité par maison ; clés absentes = 0"""

    delta: Mapping[str, int] = field(default_factory=dict)

    @property
    def l1(self) -> int:
        return sum(abs(d) for d in self.delta.values())

    @property
    def linf(self) -> int:
        return max((abs(d) for d in self.delta.values()), default=0)

    def get(self, h: str) -> int:
        return self.delta.get(h, 0)

    def validate_for(self, instance: Instance) -> None:
        for h, d in self.delta.items():
            if h not in instance.house_index:
                raise ValidationError("unknown house in capacity change", h)
            if instance.house_capacity[h] + d < 0:
                raise ValidationError("capacity change makes capacity negative", h)

    def to_document(self, instance: Instance) -> dict:
        return {"delta": {h: self.delta[h] for h in instance.houses if self.delta.get(h, 0)}}

    def serialize(self, instance: Instance) -> str:
        return dump_canonical(self.to_document(instance))


def parse_capacity_change(text: str, instance: Optional[Instance] = None) -> CapacityChange:
    doc = load_document(text, CapacityChangeSchema)
    change = CapacityChange(dict(doc.delta))
    if instance is not None:
        change.validate_for(instance)
    return change


# --------------------------------------------------------------------------
# Énumération exhaustive
# --------------------------------------------------------------------------


def _walk(edges, applicant_left, house_left, start, chosen):
    """Parcours en profondeur : préfixe avant ses extensions, arêtes croissantes"""
    yield tuple(chosen)
    for k in range(start, len(edges)):
        a, h = edges[k]
        if applicant_left[a] and house_left[h]:
            applicant_left[a] -= 1
            house_left[h] -= 1
            chosen.append(k)
            yield from _walk(edges, applicant_left, house_left, k + 1, chosen)
            chosen.pop()
            applicant_left[a] += 1
            house_left[h] += 1


def iter_edge_index_sets(instance: Instance) -> Iterator[Tuple[int, ...]]:
    """Couplages faisables sous forme d'indices dans ``instance.edges``"""
    ai, hi = instance.applicant_index, instance.house_index
    edges = [(ai[a], hi[h]) for a, h in instance.edges]
    applicant_left = [instance.applicant_capacity[a] for a in instance.applicants]
    house_left = [instance.house_capacity[h] for h in instance.houses]
    return _walk(edges, applicant_left, house_left, 0, [])


def count_matchings(instance: Instance, limit: int) -> int:
    """Nombre de couplages faisables ; TooLargeError au-delà de ``limit``"""
    if limit < 1:
        raise ContractViolation("limit must be positive")
    count = 0
    for _ in iter_edge_index_sets(instance):
        count += 1
        if count > limit:
            raise TooLargeError("instance too large for enumeration")
    return count


def enumerate_matchings(instance: Instance, limit: int) -> Iterator[Matching]:
    """Tous les couplages faisables, une fois chacun, dans l'ordre canonique"""
    count_matchings(instance, limit)
    edges = instance.edges
    for chosen in iter_edge_index_sets(instance):
        yield Matching(frozenset(edges[k] for k in chosen))

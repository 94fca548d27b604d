"""
Générateurs d'instances pour les tests et la commande ``reduce --random``

Toute l'aléa passe par un ``random.Random`` fourni par l'appelant.
"""

import itertools
import random
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .errors import TooLargeError
from .model import Instance
from .reductions import SetCoverInstance, ThreeDMInstance, oracle_set_cover


def random_instance(
    rng: random.Random,
    applicants: int,
    houses: int,
    max_applicant_capacity: int = 1,
    max_house_capacity: int = 1,
    empty_lists: bool = True,
) -> Instance:
    """Instance aléatoire : listes de longueur aléatoire, capacités dans [1, max]"""
    house_ids = [f"h{k}" for k in range(1, houses + 1)]
    prefs: Dict[str, List[str]] = {}
    for k in range(1, applicants + 1):
        length = rng.randint(0 if empty_lists else 1, houses)
        prefs[f"a{k}"] = rng.sample(house_ids, length)
    return Instance.create(
        prefs,
        {h: rng.randint(1, max_house_capacity) for h in house_ids},
        {a: rng.randint(1, max_applicant_capacity) for a in prefs},
    )


def _ordered_subsets(items: Sequence[str]) -> List[Tuple[str, ...]]:
    lists = []
    for size in range(len(items) + 1):
        lists.extend(itertools.permutations(items, size))
    return lists


def structured_instances(
    applicants: int = 2,
    houses: int = 2,
    applicant_capacities: Sequence[int] = (1,),
    house_capacities: Sequence[int] = (1,),
) -> Iterator[Instance]:
    """Toutes les instances de la forme donnée : chaque liste ordonnée, chaque capacité"""
    house_ids = [f"h{k}" for k in range(1, houses + 1)]
    applicant_ids = [f"a{k}" for k in range(1, applicants + 1)]
    lists = _ordered_subsets(house_ids)
    for chosen in itertools.product(lists, repeat=applicants):
        for qa in itertools.product(applicant_capacities, repeat=applicants):
            for qh in itertools.product(house_capacities, repeat=houses):
                yield Instance.create(
                    dict(zip(applicant_ids, chosen)),
                    dict(zip(house_ids, qh)),
                    dict(zip(applicant_ids, qa)),
                )


def worked_example(n: int) -> Instance:
    """h1 (1), h2 (2), h3 (n+1) ; a_1..a_{n+2} : h1 > h2 > h3 ; b : h2 > h1

    Avec des augmentations seules il faut n unités ; diminuer h2 d'une unité suffit.
    """
    prefs = {f"a{k}": ("h1", "h2", "h3") for k in range(1, n + 3)}
    prefs["b"] = ("h2", "h1")
    return Instance.create(prefs, {"h1": 1, "h2": 2, "h3": n + 1})


def _is_strict(n_hat: int, triples: Sequence[Tuple[int, int, int]]) -> bool:
    for axis in range(3):
        counts = [0] * (n_hat + 1)
        for triple in triples:
            counts[triple[axis]] += 1
        if any(counts[i] != 3 for i in range(1, n_hat + 1)):
            return False
    return True


def all_strict_3dm(n_hat: int) -> Iterator[ThreeDMInstance]:
    """Toutes les instances strictes (multi-ensembles de triplets triés) ; n <= 2"""
    if n_hat > 2:
        raise TooLargeError("strict 3DM enumeration is limited to nHat <= 2")
    candidates = list(itertools.product(range(1, n_hat + 1), repeat=3))
    for family in itertools.combinations_with_replacement(candidates, 3 * n_hat):
        if _is_strict(n_hat, family):
            yield ThreeDMInstance(n_hat, tuple(family), strict=True)


def _random_perfect_triples(rng: random.Random, n_hat: int) -> List[Tuple[int, int, int]]:
    bs = list(range(1, n_hat + 1))
    cs = list(range(1, n_hat + 1))
    rng.shuffle(bs)
    rng.shuffle(cs)
    return [(a, bs[a - 1], cs[a - 1]) for a in range(1, n_hat + 1)]


def planted_3dm(rng: random.Random, n_hat: int) -> Tuple[ThreeDMInstance, Tuple[int, ...]]:
    """3DM strict aléatoire contenant une couverture exacte plantée

    Trois couplages parfaits aléatoires : chaque élément apparaît exactement
    trois fois, et le premier couplage est une couverture exacte.
    """
    rounds = [_random_perfect_triples(rng, n_hat) for _ in range(3)]
    tagged = [(triple, r == 0) for r, triples in enumerate(rounds) for triple in triples]
    rng.shuffle(tagged)
    instance = ThreeDMInstance(n_hat, tuple(t for t, _ in tagged), strict=True)
    cover = tuple(j for j, (_, planted) in enumerate(tagged) if planted)
    return instance, cover


def random_set_cover(
    rng: random.Random, n_elements: int, n_sets: int, extra: Optional[int] = None
) -> SetCoverInstance:
    """Chaque élément va dans un ensemble aléatoire, puis ``extra`` ajouts au hasard"""
    members: List[set] = [set() for _ in range(n_sets)]
    for e in range(1, n_elements + 1):
        members[rng.randrange(n_sets)].add(e)
    for _ in range(n_elements if extra is None else extra):
        members[rng.randrange(n_sets)].add(rng.randint(1, n_elements))
    for subset in members:
        if not subset:
            subset.add(rng.randint(1, n_elements))
    sets = tuple(tuple(sorted(s)) for s in members)
    optimum, _ = oracle_set_cover(SetCoverInstance(n_elements, sets))
    return SetCoverInstance(n_elements, sets, optimum)

"""
Primitives de graphes : couplage biparti capacité de cardinalité puis poids maximum,
plus courts chemins et détection de cycle négatif (Bellman-Ford)

Le couplage passe par un flot de coût minimum à plus courts chemins successifs.
Les coûts sont des triplets entiers comparés lexicographiquement
(saturation imposée, taille, poids) : aucune pondération « grand M ».
"""

import logging
from dataclasses import dataclass, field
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from .errors import ContractViolation, InfeasibleError, ValidationError

logger = logging.getLogger("popcap.engine")

Node = Hashable


class Arc(NamedTuple):
    tail: Node
    head: Node
    weight: Any
    tag: Any = None


@dataclass(frozen=True)
class DirectedWeightedGraph:
    """Graphe orienté pondéré ; arcs parallèles permis, boucles interdites"""

    nodes: Tuple[Node, ...]
    arcs: Tuple[Arc, ...]

    def __post_init__(self) -> None:
        known = set(self.nodes)
        for arc in self.arcs:
            if arc.tail == arc.head:
                raise ValidationError("self-loop", repr(arc.tail))
            if arc.tail not in known or arc.head not in known:
                raise ValidationError("arc endpoint is not a node", repr(arc))


@dataclass(frozen=True)
class ShortestPaths:
    distance: Dict[Node, Any]
    predecessor: Dict[Node, Arc]

    def path_to(self, node: Node) -> List[Arc]:
        """Chemin de poids minimum depuis l'ensemble source jusqu'à ``node``"""
        if node not in self.distance:
            raise ContractViolation(f"node {node!r} is unreachable")
        path: List[Arc] = []
        current = node
        while current in self.predecessor:
            arc = self.predecessor[current]
            path.append(arc)
            current = arc.tail
        path.reverse()
        return path


@dataclass(frozen=True)
class NegativeCycle:
    arcs: Tuple[Arc, ...]

    @property
    def weight(self) -> int:
        return sum(arc.weight for arc in self.arcs)


def _relax_all(
    nodes: Sequence[Node],
    arcs: Sequence[Arc],
    sources: Iterable[Node],
    zero: Any,
    add: Callable[[Any, Any], Any],
) -> Tuple[Dict[Node, Any], Dict[Node, Arc], Optional[Node]]:
    """Bellman-Ford multi-source ; renvoie aussi un sommet relâché au n-ième tour"""
    distance: Dict[Node, Any] = {s: zero for s in sources}
    predecessor: Dict[Node, Arc] = {}

    for _stage in range(len(nodes)):
        changed: Optional[Node] = None
        for arc in arcs:
            du = distance.get(arc.tail)
            if du is None:
                continue
            candidate = add(du, arc.weight)
            dv = distance.get(arc.head)
            if dv is None or candidate < dv:
                distance[arc.head] = candidate
                predecessor[arc.head] = arc
                changed = arc.head
        if changed is None:
            return distance, predecessor, None

    return distance, predecessor, changed


def _extract_cycle(predecessor: Mapping[Node, Arc], start: Node, n: int) -> Tuple[Arc, ...]:
    node = start
    for _ in range(n):
        node = predecessor[node].tail

    cycle: List[Arc] = []
    current = node
    while True:
        arc = predecessor[current]
        cycle.append(arc)
        current = arc.tail
        if current == node:
            break
    cycle.reverse()
    return tuple(cycle)


def shortest_paths_or_negative_cycle(
    graph: DirectedWeightedGraph, sources: Iterable[Node]
) -> Union[ShortestPaths, NegativeCycle]:
    """Distances exactes depuis ``sources``, ou un cycle négatif atteignable"""
    distance, predecessor, witness = _relax_all(
        graph.nodes, graph.arcs, list(sources), 0, lambda x, y: x + y
    )
    if witness is not None:
        cycle = _extract_cycle(predecessor, witness, len(graph.nodes))
        weight = sum(a.weight for a in cycle)
        logger.debug("Cycle négatif de %d arcs, poids %d", len(cycle), weight)
        return NegativeCycle(cycle)
    return ShortestPaths(distance, predecessor)


# --------------------------------------------------------------------------
# Couplage biparti capacité
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightedBipartiteProblem:
    """Gauche à offre unitaire, droite capacitée, arêtes pondérées

    ``fixed`` : arêtes imposées ; ``saturated`` : sommets droits à remplir exactement.
    """

    left: Tuple[Node, ...]
    right: Tuple[Node, ...]
    capacity: Mapping[Node, int]
    edges: Tuple[Tuple[Node, Node, int], ...]
    fixed: FrozenSet[Tuple[Node, Node]] = field(default_factory=frozenset)
    saturated: FrozenSet[Node] = field(default_factory=frozenset)


@dataclass(frozen=True)
class BipartiteSolution:
    edges: Tuple[Tuple[Node, Node], ...]
    size: int
    weight: int


_ZERO = (0, 0, 0)


def _add3(x: Tuple[int, int, int], y: Tuple[int, int, int]) -> Tuple[int, int, int]:
    return (x[0] + y[0], x[1] + y[1], x[2] + y[2])


def _neg3(x: Tuple[int, int, int]) -> Tuple[int, int, int]:
    return (-x[0], -x[1], -x[2])


class _FlowNetwork:
    """Réseau résiduel ; arc direct à l'indice pair, arc inverse à l'indice suivant"""

    def __init__(self) -> None:
        self.tail: List[Node] = []
        self.head: List[Node] = []
        self.cap: List[int] = []
        self.cost: List[Tuple[int, int, int]] = []
        self.flow: List[int] = []

    def add(self, tail: Node, head: Node, cap: int, cost: Tuple[int, int, int]) -> int:
        index = len(self.tail)
        for t, h, c, k in ((tail, head, cap, cost), (head, tail, 0, _neg3(cost))):
            self.tail.append(t)
            self.head.append(h)
            self.cap.append(c)
            self.cost.append(k)
            self.flow.append(0)
        return index

    def residual_arcs(self) -> List[Arc]:
        return [
            Arc(self.tail[i], self.head[i], self.cost[i], i)
            for i in range(len(self.tail))
            if self.flow[i] < self.cap[i]
        ]

    def push(self, index: int, amount: int) -> None:
        self.flow[index] += amount
        self.flow[index ^ 1] -= amount


_SOURCE = ("__source__",)
_SINK = ("__sink__",)


def _validate_problem(p: WeightedBipartiteProblem) -> None:
    left, right = set(p.left), set(p.right)
    seen = set()
    for u, v, _w in p.edges:
        if u not in left or v not in right:
            raise ValidationError("edge endpoint is not declared", f"{u!r}-{v!r}")
        if (u, v) in seen:
            raise ValidationError("duplicate edge", f"{u!r}-{v!r}")
        seen.add((u, v))
    for e in p.fixed:
        if e not in seen:
            raise ContractViolation(f"fixed edge {e!r} is not an edge of the problem")
    for r in p.saturated:
        if r not in right:
            raise ContractViolation(f"saturated node {r!r} is not a right node")


def max_size_max_weight_matching(p: WeightedBipartiteProblem) -> BipartiteSolution:
    """Couplage de taille maximum puis de poids maximum, sous contraintes

    Lève ``InfeasibleError`` (avec le sommet fautif) si les arêtes imposées ou
    les saturations demandées ne peuvent pas être respectées.
    """
    _validate_problem(p)
    left_pos = {u: i for i, u in enumerate(p.left)}
    right_pos = {r: i for i, r in enumerate(p.right)}

    def canonical(e: Tuple[Node, Node]) -> Tuple[int, int]:
        return (left_pos[e[0]], right_pos[e[1]])

    remaining = {r: p.capacity[r] for r in p.right}
    fixed_left = set()
    for u, v in sorted(p.fixed, key=canonical):
        if u in fixed_left:
            raise ContractViolation(f"left node {u!r} has two fixed edges")
        fixed_left.add(u)
        remaining[v] -= 1
        if remaining[v] < 0:
            raise InfeasibleError("fixed edges exceed capacity", node=str(v))

    free_left = [u for u in p.left if u not in fixed_left]
    free_set = set(free_left)
    free_edges = [(u, v, w) for u, v, w in p.edges if u in free_set]

    for r in p.right:
        if r in p.saturated and remaining[r] > sum(1 for _u, v, _w in free_edges if v == r):
            raise InfeasibleError("cannot saturate right node", node=str(r))

    network = _FlowNetwork()
    for u in free_left:
        network.add(_SOURCE, ("L", u), 1, (0, -1, 0))
    edge_arcs = []
    for u, v, w in free_edges:
        edge_arcs.append((network.add(("L", u), ("R", v), 1, (0, 0, -w)), u, v, w))
    sink_arcs = {}
    for r in p.right:
        if remaining[r] > 0:
            cost = (-1, 0, 0) if r in p.saturated else _ZERO
            sink_arcs[r] = network.add(("R", r), _SINK, remaining[r], cost)

    nodes = [_SOURCE] + [("L", u) for u in free_left] + [("R", r) for r in p.right] + [_SINK]
    augmentations = 0
    while True:
        distance, predecessor, _ = _relax_all(
            nodes, network.residual_arcs(), [_SOURCE], _ZERO, _add3
        )
        if _SINK not in distance or not distance[_SINK] < _ZERO:
            break
        node = _SINK
        while node != _SOURCE:
            arc = predecessor[node]
            network.push(arc.tag, 1)
            node = arc.tail
        augmentations += 1

    for r in sorted(p.saturated, key=right_pos.__getitem__):
        filled = network.flow[sink_arcs[r]] if r in sink_arcs else 0
        if filled < remaining[r]:
            raise InfeasibleError("cannot saturate right node", node=str(r))

    chosen = set(p.fixed)
    for index, u, v, _w in edge_arcs:
        if network.flow[index] > 0:
            chosen.add((u, v))

    weight_of = {(u, v): w for u, v, w in p.edges}
    ordered = tuple(sorted(chosen, key=canonical))
    solution = BipartiteSolution(
        edges=ordered, size=len(ordered), weight=sum(weight_of[e] for e in ordered)
    )
    logger.debug(
        "Couplage : %d augmentations, taille %d, poids %d",
        augmentations,
        solution.size,
        solution.weight,
    )
    return solution


def max_flow(arcs: Iterable[Tuple[Node, Node, int]], source: Node, sink: Node) -> int:
    """Valeur d'un flot maximum de ``source`` à ``sink`` (arcs capacités, sans coût)"""
    network = _FlowNetwork()
    nodes = {source: None, sink: None}
    for u, v, c in arcs:
        if c < 0:
            raise ValidationError("negative capacity", f"{u!r}-{v!r}")
        network.add(u, v, c, _ZERO)
        nodes.setdefault(u)
        nodes.setdefault(v)

    total = 0
    while True:
        _distance, predecessor, _ = _relax_all(
            list(nodes), network.residual_arcs(), [source], _ZERO, _add3
        )
        if sink not in predecessor:
            return total
        path = []
        node = sink
        while node != source:
            arc = predecessor[node]
            path.append(arc.tag)
            node = arc.tail
        amount = min(network.cap[i] - network.flow[i] for i in path)
        for i in path:
            network.push(i, amount)
        total += amount

"""
Primal graphs, orderings and pseudo-trees
-----------------------------------------

Primal graphs are plain ``networkx.Graph`` objects whose nodes are the variable ids
``0..n-1``. An :class:`Ordering` lists variables from lowest to highest priority;
bucket elimination processes it from the tail, and the pseudo-tree is rooted at its
head.
"""
import itertools
import logging
import pathlib
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Sequence, Set, Tuple, Union

import networkx as nx

from .models import DisconnectedGraphError, ParseError, PreconditionError
from .problem import Problem

logger = logging.getLogger(__name__)


def build_primal_graph(problem: Problem) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(problem.n))
    for f in problem.functions:
        graph.add_edges_from(itertools.combinations(f.scope, 2))
    return graph


@dataclass(frozen=True)
class Ordering:
    order: Tuple[int, ...]
    position: Dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        object.__setattr__(self, "order", order)
        if sorted(order) != list(range(len(order))):
            raise PreconditionError(f"Ordering {order} is not a permutation of 0..{len(order) - 1}")
        object.__setattr__(self, "position", {v: i for i, v in enumerate(order)})

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def sort(self, variables) -> Tuple[int, ...]:
        """Variables sorted by ascending priority."""
        return tuple(sorted(variables, key=self.position.__getitem__))

    def restrict(self, variables) -> List[int]:
        keep = set(variables)
        return [v for v in self.order if v in keep]


def width(graph: nx.Graph, ordering: Ordering) -> int:
    """Max number of earlier neighbours of a node in ``graph`` itself (no induced edges)."""
    pos = ordering.position
    return max(
        (sum(1 for u in graph[v] if pos[u] < pos[v]) for v in graph.nodes), default=0
    )


def induced_width(graph: nx.Graph, ordering: Ordering) -> int:
    """w*_o: connect each node's earlier neighbours, processing nodes from last to first."""
    pos = ordering.position
    adjacency = {v: set(graph[v]) for v in graph.nodes}
    best = 0
    for v in reversed(ordering.order):
        earlier = [u for u in adjacency[v] if pos[u] < pos[v]]
        best = max(best, len(earlier))
        for a, b in itertools.combinations(earlier, 2):
            adjacency[a].add(b)
            adjacency[b].add(a)
    return best


def default_ordering(graph: nx.Graph) -> Ordering:
    """Ascending degree, ties by variable id (high-degree variables are eliminated first)."""
    return Ordering(tuple(sorted(graph.nodes, key=lambda v: (graph.degree[v], v))))


def min_degree_ordering(graph: nx.Graph) -> Ordering:
    """Greedy min-degree elimination; the first eliminated variable ends up last."""
    adjacency = {v: set(graph[v]) for v in graph.nodes}
    eliminated = []
    while adjacency:
        v = min(adjacency, key=lambda u: (len(adjacency[u]), u))
        neighbours = adjacency.pop(v)
        for a in neighbours:
            adjacency[a].discard(v)
            adjacency[a].update(neighbours - {a})
        eliminated.append(v)
    return Ordering(tuple(reversed(eliminated)))


def connected_components(graph: nx.Graph) -> List[FrozenSet[int]]:
    components = [frozenset(c) for c in nx.connected_components(graph)]
    return sorted(components, key=min)


def read_ordering(path: Union[str, pathlib.Path]) -> Ordering:
    text = pathlib.Path(path).read_text()
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) != 1:
        raise ParseError(f"ordering file must contain exactly one line (found {len(lines)})")
    try:
        return Ordering(tuple(int(tok) for tok in lines[0].split()))
    except ValueError as e:
        raise ParseError(str(e), line=1) from e


def write_ordering(ordering: Ordering, path: Union[str, pathlib.Path]) -> None:
    pathlib.Path(path).write_text(" ".join(str(v) for v in ordering.order) + "\n")


@dataclass
class PseudoTree:
    root: int
    parent: Dict[int, int]
    children: Dict[int, List[int]]
    pseudo_parents: Dict[int, List[int]]
    separator: Dict[int, FrozenSet[int]]
    # DFS preorder; a valid ordering for the tree's variables
    dfs_order: Tuple[int, ...]
    depth: Dict[int, int]

    @property
    def nodes(self) -> Tuple[int, ...]:
        return self.dfs_order

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    def ancestors(self, v: int) -> List[int]:
        result = []
        while v in self.parent:
            v = self.parent[v]
            result.append(v)
        return result

    def tree_edges(self) -> Set[Tuple[int, int]]:
        return {(p, c) for c, p in self.parent.items()}

    def backedges(self) -> Set[Tuple[int, int]]:
        return {(a, v) for v, pps in self.pseudo_parents.items() for a in pps}


def build_pseudo_tree(graph: nx.Graph, ordering: Ordering) -> PseudoTree:
    """DFS pseudo-tree rooted at the ordering's first variable.

    Unvisited neighbours are explored in ascending priority. Raises
    DisconnectedGraphError when the graph has more than one component.
    """
    if graph.number_of_nodes() == 0:
        raise PreconditionError("Cannot build a pseudo-tree on an empty graph")
    if not nx.is_connected(graph):
        raise DisconnectedGraphError(
            "Primal graph is disconnected; split it with connected_components first"
        )
    return _dfs_tree(graph, ordering, ordering.restrict(graph.nodes)[0])


def build_pseudo_forest(graph: nx.Graph, ordering: Ordering) -> List[PseudoTree]:
    """One pseudo-tree per connected component, each rooted at its lowest-priority variable."""
    forest = []
    for component in connected_components(graph):
        root = ordering.restrict(component)[0]
        forest.append(_dfs_tree(graph.subgraph(component), ordering, root))
    return forest


def _dfs_tree(graph: nx.Graph, ordering: Ordering, root: int) -> PseudoTree:
    pos = ordering.position
    neighbours = {v: sorted(graph[v], key=pos.__getitem__) for v in graph.nodes}
    parent: Dict[int, int] = {}
    depth = {root: 0}
    preorder = [root]
    stack = [(root, iter(neighbours[root]))]
    while stack:
        v, it = stack[-1]
        for u in it:
            if u not in depth:
                parent[u] = v
                depth[u] = depth[v] + 1
                preorder.append(u)
                stack.append((u, iter(neighbours[u])))
                break
        else:
            stack.pop()

    children: Dict[int, List[int]] = {v: [] for v in preorder}
    for v in preorder[1:]:
        children[parent[v]].append(v)
    pseudo_parents = {
        v: sorted(
            (u for u in graph[v] if depth[u] < depth[v] and parent.get(v) != u),
            key=pos.__getitem__,
        )
        for v in preorder
    }
    separator: Dict[int, FrozenSet[int]] = {}
    for v in reversed(preorder):
        linked = {u for u in graph[v] if depth[u] < depth[v]}
        for c in children[v]:
            linked |= separator[c]
        linked.discard(v)
        separator[v] = frozenset(linked)
    return PseudoTree(
        root=root,
        parent=parent,
        children=children,
        pseudo_parents=pseudo_parents,
        separator=separator,
        dfs_order=tuple(preorder),
        depth=depth,
    )


def forest_ordering(forest: Sequence[PseudoTree]) -> Ordering:
    """Concatenated DFS orders of a pseudo-forest, usable as a global elimination ordering."""
    return Ordering(tuple(v for tree in forest for v in tree.dfs_order))

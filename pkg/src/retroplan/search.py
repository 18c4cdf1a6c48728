"""P-UCB Monte Carlo Tree Search over molecule-set nodes.

Each node holds the set of still-open (not purchasable) molecules.
Selection descends by maximal P-UCB, expansion applies policy-proposed
templates to the largest open molecule, the binary reward is whether any
new child reaches an all-in-stock state, and Q values back up along the
path with the incremental mean update.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .chem.mol import Molecule
from .metrics import route_cost
from .policy import PolicyConfig, normalize_priors, propose
from .routes import RouteTree, build_route
from .stock import StockSet
from .templates import RetroTemplate, apply_template, template_hash


@dataclass
class SearchConfig:
    c_pucb: float = 100.0
    temperature: float = 3.0
    expansions: int = 10
    max_iterations: int = 500
    time_limit_s: float = 300.0
    q_init: float = 0.5

    def __post_init__(self):
        for name in ("c_pucb", "temperature", "expansions",
                     "max_iterations", "time_limit_s", "q_init"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class SearchNode:
    """MolSet node: open molecules plus visit statistics."""

    __slots__ = ("mols", "visit_count", "value", "prior", "parent", "children",
                 "applied_template", "expanded_smiles", "reactant_smiles",
                 "expanded", "solved")

    def __init__(self, mols: tuple[Molecule, ...], prior: float, q_init: float,
                 parent: "SearchNode | None" = None,
                 applied_template: RetroTemplate | None = None,
                 expanded_smiles: str | None = None,
                 reactant_smiles: tuple[str, ...] = ()):
        self.mols = mols
        self.visit_count = 0
        self.value = q_init
        self.prior = prior
        self.parent = parent
        self.children: list[SearchNode] = []
        self.applied_template = applied_template
        self.expanded_smiles = expanded_smiles
        self.reactant_smiles = reactant_smiles
        self.expanded = False
        self.solved = not mols

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


def puct_score(node: SearchNode, parent_visits: int, c_pucb: float) -> float:
    """Q(s) + C * prior(s) * sqrt(N(parent)) / (1 + N(s))."""
    return node.value + c_pucb * node.prior * math.sqrt(parent_visits) / (
        1 + node.visit_count)


def backpropagate(leaf: SearchNode, reward: int) -> None:
    """Update Q and N on every node from leaf to root, once each."""
    node: SearchNode | None = leaf
    while node is not None:
        node.value = (reward + node.value * node.visit_count) / (
            node.visit_count + 1)
        node.visit_count += 1
        node = node.parent


@dataclass
class SearchResult:
    root: SearchNode
    target: Molecule
    stock: StockSet
    solved: bool
    iterations: int
    nodes: int
    first_solution_iter: int | None
    first_solution_time_s: float | None
    wall_time_s: float

    def stats(self) -> dict:
        return {
            "solved": self.solved,
            "first_solution_iter": self.first_solution_iter,
            "first_solution_time_s": self.first_solution_time_s,
            "iterations": self.iterations,
            "nodes": self.nodes,
        }


def run_search(
    target: Molecule,
    backend,
    stock: StockSet,
    cfg: SearchConfig | None = None,
    policy_cfg: PolicyConfig | None = None,
) -> SearchResult:
    cfg = cfg or SearchConfig()
    policy_cfg = (policy_cfg or PolicyConfig()).with_k(cfg.expansions)
    started = time.monotonic()

    open_mols = () if target in stock else (target,)
    root = SearchNode(open_mols, prior=1.0, q_init=cfg.q_init)
    if root.solved:
        return SearchResult(root, target, stock, True, 0, 1, 0, 0.0,
                            time.monotonic() - started)

    node_count = 1
    first_iter: int | None = None
    first_time: float | None = None
    iterations = 0

    for iteration in range(1, cfg.max_iterations + 1):
        if time.monotonic() - started > cfg.time_limit_s:
            break
        iterations = iteration

        node = root
        while node.children:
            parent_visits = max(node.visit_count, 1)
            node = max(node.children,
                       key=lambda c: puct_score(c, parent_visits, cfg.c_pucb))

        if node.solved:
            backpropagate(node, 1)
            continue
        if node.expanded:  # exhausted dead end
            backpropagate(node, 0)
            continue

        children = _expand(node, backend, stock, cfg, policy_cfg)
        node_count += len(children)
        if not children and node is root:
            break  # nothing applicable to the target at all
        reward = 1 if any(c.solved for c in children) else 0
        if reward and first_iter is None:
            first_iter = iteration
            first_time = time.monotonic() - started
        backpropagate(node, reward)

    return SearchResult(
        root, target, stock,
        solved=first_iter is not None,
        iterations=iterations,
        nodes=node_count,
        first_solution_iter=first_iter,
        first_solution_time_s=first_time,
        wall_time_s=time.monotonic() - started,
    )


def _pick_open_molecule(node: SearchNode) -> Molecule:
    # hardest first: most atoms, canonical string as the deterministic tie-break
    return max(node.mols, key=lambda m: (m.num_atoms, m.canonical()))


def _expand(node: SearchNode, backend, stock: StockSet,
            cfg: SearchConfig, policy_cfg: PolicyConfig) -> list[SearchNode]:
    node.expanded = True
    mol = _pick_open_molecule(node)
    proposals = propose(backend, mol, policy_cfg)
    if not proposals:
        return []
    priors = normalize_priors(proposals, cfg.temperature)
    rest = tuple(m for m in node.mols if m is not mol)

    children: list[SearchNode] = []
    for proposal, prior in zip(proposals, priors):
        for reactant_set in apply_template(proposal.template, mol):
            open_mols = {m.canonical(): m for m in rest}
            for m in reactant_set.molecules:
                if m not in stock:
                    open_mols.setdefault(m.canonical(), m)
            child = SearchNode(
                mols=tuple(open_mols[c] for c in sorted(open_mols)),
                prior=prior,
                q_init=cfg.q_init,
                parent=node,
                applied_template=proposal.template,
                expanded_smiles=mol.canonical(),
                reactant_smiles=reactant_set.key,
            )
            children.append(child)
    node.children = children
    return children


def extract_routes(result: SearchResult, max_routes: int = 10,
                   eps: float = 1.0, yld: float = 0.8) -> list[RouteTree]:
    """Distinct solved routes, cheapest first."""
    target_smiles = result.target.canonical()
    if result.root.solved:
        return [build_route(target_smiles, [], lambda s: s in result.stock)]

    routes: list[RouteTree] = []
    seen: set[str] = set()
    for node in result.root.walk():
        if not node.solved or node is result.root:
            continue
        chain = []
        cursor: SearchNode | None = node
        while cursor is not None and cursor.parent is not None:
            chain.append((
                cursor.expanded_smiles,
                cursor.applied_template.source_smarts,
                template_hash(cursor.applied_template),
                list(cursor.reactant_smiles),
            ))
            cursor = cursor.parent
        chain.reverse()
        route = build_route(target_smiles, chain, lambda s: s in result.stock)
        h = route.route_hash()
        if h not in seen:
            seen.add(h)
            routes.append(route)

    routes.sort(key=lambda r: route_cost(r, eps, yld))
    return routes[:max_routes]

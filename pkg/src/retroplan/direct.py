"""Direct multi-step planning: reconstruct whole routes from generated
template sequences, run the conditioning scans, and rank the candidates.

Route reconstruction follows the molecular-set-graph procedure: every
template in the sequence is applied to every node of the current
frontier; nodes a template does not apply to simply do not advance, and
when no node advances at all the frontier is retained for the next
template.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .chem.mol import Molecule
from .chem.smarts import SmartsError
from .routes import RouteTree, build_route
from .stock import StockSet
from .templates import (
    RetroTemplate,
    TemplateError,
    apply_template,
    parse_retro_template,
    template_hash,
)

SCAN_PLANS: dict[str, list[tuple[str | None, int]]] = {
    "vanilla": [(None, 50)],
    "n_step": [(f"<STEPS={n}>", 10) for n in range(2, 10)],
    "nine_step": [("<STEPS=9>", 50)],
    "leaf_size": [(f"<LEAF_ATOMS={a}>", 10) for a in range(10, 45, 5)],
}


@dataclass
class TemplateSequence:
    templates: tuple[RetroTemplate, ...]
    log_prob: float = 0.0
    condition: str | None = None

    def __post_init__(self):
        if not self.templates:
            raise ValueError("template sequence must be non-empty")


@dataclass
class MolSetNode:
    mols: tuple[Molecule, ...]
    purchasable: frozenset[str] = frozenset()
    parent: "MolSetNode | None" = None
    children: list = field(default_factory=list)
    template: RetroTemplate | None = None
    template_index: int | None = None
    applied_to: str | None = None
    produced: tuple[str, ...] = ()

    @property
    def solved(self) -> bool:
        return all(m.canonical() in self.purchasable for m in self.mols)

    def mols_key(self) -> tuple[str, ...]:
        return tuple(m.canonical() for m in self.mols)


@dataclass
class MolSetGraph:
    root: MolSetNode
    nodes: list[MolSetNode]

    def leaves(self) -> list[MolSetNode]:
        return [n for n in self.nodes if not n.children]


def _mark_purchasable(mols, stock: StockSet | None) -> frozenset[str]:
    if stock is None:
        return frozenset()
    return frozenset(m.canonical() for m in mols if m in stock)


def apply_to_molecule_set(
    mols: tuple[Molecule, ...], template: RetroTemplate
) -> list[tuple[tuple[Molecule, ...], str, tuple[str, ...]]]:
    """Apply one template to every molecule of a set.

    Returns (new molecule set, rewritten molecule, produced reactants) per
    applicable site, in deterministic molecule-then-site order.
    """
    out = []
    for mol in mols:
        for rs in apply_template(template, mol):
            merged: dict[str, Molecule] = {}
            for other in mols:
                if other is not mol:
                    merged.setdefault(other.canonical(), other)
            for m in rs.molecules:
                merged.setdefault(m.canonical(), m)
            new_set = tuple(merged[c] for c in sorted(merged))
            out.append((new_set, mol.canonical(), rs.key))
    return out


def reconstruct_routes(
    target: Molecule,
    seq: TemplateSequence,
    stock: StockSet | None = None,
) -> MolSetGraph:
    """Build the molecular set graph for one template sequence."""
    root = MolSetNode((target,), _mark_purchasable((target,), stock))
    graph = MolSetGraph(root, [root])
    current = [root]

    for index, template in enumerate(seq.templates):
        advancing: list[MolSetNode] = []
        for node in current:
            for new_set, applied_to, produced in apply_to_molecule_set(
                    node.mols, template):
                child = MolSetNode(
                    mols=new_set,
                    purchasable=_mark_purchasable(new_set, stock),
                    parent=node,
                    template=template,
                    template_index=index,
                    applied_to=applied_to,
                    produced=produced,
                )
                node.children.append(child)
                graph.nodes.append(child)
                advancing.append(child)
        if advancing:
            current = advancing
    return graph


def routes_from_graph(graph: MolSetGraph, stock: StockSet | None) -> list[RouteTree]:
    """Route per terminal node, plus truncated routes for solved interior
    nodes; deduplicated by route hash in node-creation order."""
    def in_stock(s: str) -> bool:
        return stock is not None and s in stock

    target = graph.root.mols[0].canonical()
    seen: set[str] = set()
    out: list[RouteTree] = []
    for node in graph.nodes:
        if node is graph.root:
            continue
        if node.children and not node.solved:
            continue
        chain = []
        cursor: MolSetNode | None = node
        while cursor is not None and cursor.parent is not None:
            chain.append((cursor.applied_to,
                          cursor.template.source_smarts,
                          template_hash(cursor.template),
                          list(cursor.produced)))
            cursor = cursor.parent
        chain.reverse()
        route = build_route(target, chain, in_stock)
        h = route.route_hash()
        if h not in seen:
            seen.add(h)
            out.append(route)
    return out


def parse_sequence(
    template_strings: list[str], log_prob: float, condition: str | None
) -> TemplateSequence | None:
    """Decode template strings; decoding stops at the first invalid one."""
    templates: list[RetroTemplate] = []
    for s in template_strings:
        try:
            templates.append(parse_retro_template(s))
        except (TemplateError, SmartsError):
            break
    if not templates:
        return None
    return TemplateSequence(tuple(templates), log_prob, condition)


def condition_scan(
    target: Molecule,
    backend,
    variant: str,
    stock: StockSet | None = None,
) -> list[tuple[RouteTree, float]]:
    """Run one sampling plan and reconstruct every returned sequence.

    A condition yielding zero sequences does not abort the scan; a dead
    backend does (BackendUnavailableError propagates).
    """
    if variant not in SCAN_PLANS:
        raise ValueError(f"unknown variant {variant!r}; "
                         f"choose from {sorted(SCAN_PLANS)}")
    smiles = target.canonical()
    collected: list[tuple[RouteTree, float]] = []
    for condition, n_samples in SCAN_PLANS[variant]:
        raw = backend.sample_route_sequences(smiles, n_samples, condition)
        for template_strings, log_prob in raw:
            seq = parse_sequence(list(template_strings), log_prob, condition)
            if seq is None:
                continue
            graph = reconstruct_routes(target, seq, stock)
            for route in routes_from_graph(graph, stock):
                route.log_prob = log_prob
                collected.append((route, log_prob))
    return collected


def rank_direct_routes(
    routes: list[tuple[RouteTree, float]]
) -> list[tuple[RouteTree, float]]:
    """Solved first, then fewer steps, then higher log-likelihood; stable
    for full ties."""
    return sorted(routes,
                  key=lambda rl: (not rl[0].solved, rl[0].length, -rl[1]))

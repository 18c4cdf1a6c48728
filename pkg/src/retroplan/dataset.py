"""Reaction ingestion, the cleaning filter pipeline, benchmark splits,
and multi-step route construction from patent groupings.

Reactions arrive as JSON Lines records
``{"id": str, "patent_id": str?, "rxn_smiles": "reactants>agents>product"}``
with atom maps already assigned.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace

from .chem.mol import Molecule, BondOrder, molecular_weight
from .chem.parse import SmilesError, parse_smiles
from .routes import RouteNode, RouteStep, RouteTree
from .stock import StockSet, load_stock  # re-exported; stock file lives here
from .templates import TemplateLibrary

logger = logging.getLogger(__name__)

__all__ = [
    "ReactionRecord", "FilterReport", "FILTER_RULES", "filter_reaction",
    "parse_reaction_record", "reaction_hash", "build_hard_split",
    "split_by_molweight", "build_routes", "load_stock", "StockSet",
]

DEFAULT_MW_THRESHOLD = 500.0
DEFAULT_RARITY_CUTOFF = 10

FILTER_RULES = (
    "max_three_reactants",
    "single_product",
    "reactant_atoms_in_range",
    "product_atoms_at_least_8",
    "reactant_atoms_below_4x_product",
    "unmapped_reactant_atoms_below_30",
    "noncontributing_reactants_removed",
    "orphan_atoms_at_most_1",
    "unmapped_mcs_atoms_at_most_10",
    "product_not_in_reactants",
    "no_aromatic_bond_mapped_unmapped",
)


@dataclass(frozen=True)
class ReactionRecord:
    id: str
    reactants: tuple[Molecule, ...]
    products: tuple[Molecule, ...]
    patent_id: str | None = None
    template_smarts: str | None = None
    template_hash: str | None = None
    raw: str = ""

    @property
    def product(self) -> Molecule:
        if len(self.products) != 1:
            raise ValueError(f"reaction {self.id} has {len(self.products)} products")
        return self.products[0]


@dataclass
class FilterReport:
    rules: dict[str, bool] = field(default_factory=dict)
    removed_reactants: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return all(self.rules.values())

    def failed_rules(self) -> list[str]:
        return [name for name, ok in self.rules.items() if not ok]


def parse_reaction_record(rec: dict) -> ReactionRecord:
    """Parse one JSONL record; agents (middle '>' field) are dropped."""
    rxn = rec["rxn_smiles"]
    parts = rxn.split(">")
    if len(parts) == 3:
        reactant_part, _agents, product_part = parts
    elif len(parts) == 2:
        reactant_part, product_part = parts
    else:
        raise SmilesError(f"bad rxn_smiles {rxn!r}", 0)
    reactants = tuple(parse_smiles(s) for s in reactant_part.split(".") if s)
    products = tuple(parse_smiles(s) for s in product_part.split(".") if s)
    return ReactionRecord(
        id=str(rec["id"]),
        reactants=reactants,
        products=products,
        patent_id=rec.get("patent_id"),
        template_smarts=rec.get("template"),
        template_hash=rec.get("template_hash"),
        raw=rxn,
    )


def _maps_of(mol: Molecule) -> set[int]:
    return {a.atom_map for a in mol.atoms if a.atom_map is not None}


def filter_reaction(r: ReactionRecord) -> tuple[bool, ReactionRecord, FilterReport]:
    """Apply the cleaning rules in order.

    Reactants contributing no mapped atom to the product are removed
    first (a modification, recorded but never a rejection); the remaining
    rules then judge the modified reaction.
    """
    report = FilterReport()

    product_maps: set[int] = set()
    for p in r.products:
        product_maps |= _maps_of(p)

    kept, removed = [], []
    for mol in r.reactants:
        if _maps_of(mol) & product_maps:
            kept.append(mol)
        else:
            removed.append(mol.canonical())
    modified = replace(r, reactants=tuple(kept)) if removed else r
    report.removed_reactants = removed

    reactant_atoms = sum(m.num_atoms for m in modified.reactants)
    product_atoms = sum(p.num_atoms for p in modified.products)
    unmapped_reactant = sum(
        1 for m in modified.reactants for a in m.atoms if a.atom_map is None)

    reactant_maps: set[int] = set()
    duplicate_orphans = 0
    for m in modified.reactants:
        for a in m.atoms:
            if a.atom_map is not None:
                if a.atom_map in reactant_maps:
                    duplicate_orphans += 1
                reactant_maps.add(a.atom_map)
    orphans = len(product_maps ^ reactant_maps) + duplicate_orphans

    report.rules["max_three_reactants"] = len(modified.reactants) <= 3
    report.rules["single_product"] = len(modified.products) == 1
    report.rules["reactant_atoms_in_range"] = 10 <= reactant_atoms <= 70
    report.rules["product_atoms_at_least_8"] = product_atoms >= 8
    report.rules["reactant_atoms_below_4x_product"] = (
        reactant_atoms < 4 * product_atoms)
    report.rules["unmapped_reactant_atoms_below_30"] = unmapped_reactant < 30
    report.rules["noncontributing_reactants_removed"] = True
    report.rules["orphan_atoms_at_most_1"] = orphans <= 1
    report.rules["unmapped_mcs_atoms_at_most_10"] = (
        _unmapped_mcs_atoms(modified) <= 10)
    product_canonicals = {p.canonical() for p in modified.products}
    report.rules["product_not_in_reactants"] = not any(
        m.canonical() in product_canonicals for m in modified.reactants)
    report.rules["no_aromatic_bond_mapped_unmapped"] = not (
        any(_has_mixed_aromatic_bond(m) for m in modified.reactants)
        or any(_has_mixed_aromatic_bond(p) for p in modified.products))

    return report.accepted, modified, report


def _has_mixed_aromatic_bond(mol: Molecule) -> bool:
    for b in mol.bonds:
        if b.order is BondOrder.AROMATIC:
            m1 = mol.atoms[b.a1].atom_map is not None
            m2 = mol.atoms[b.a2].atom_map is not None
            if m1 != m2:
                return True
    return False


def _unmapped_mcs_atoms(r: ReactionRecord) -> int:
    """Unmapped atoms absorbed into the map-induced common substructure.

    The correspondence starts from atoms paired by map and grows greedily:
    an unmapped reactant neighbor pairs with an unmapped product neighbor
    of matching element and bond order to the anchor. Not an exact MCS,
    deliberately; growth is deterministic (lowest indices first).
    """
    if len(r.products) != 1:
        return 0
    product = r.products[0]
    pmap = {a.atom_map: i for i, a in enumerate(product.atoms)
            if a.atom_map is not None}

    pairs: list[tuple[tuple[int, int], int]] = []
    matched_r: set[tuple[int, int]] = set()
    matched_p: set[int] = set()
    for mi, mol in enumerate(r.reactants):
        for i, a in enumerate(mol.atoms):
            if a.atom_map is not None and a.atom_map in pmap:
                pairs.append(((mi, i), pmap[a.atom_map]))
                matched_r.add((mi, i))
                matched_p.add(pmap[a.atom_map])

    grown = 0
    changed = True
    while changed:
        changed = False
        for (mi, ri), pi in list(pairs):
            mol = r.reactants[mi]
            r_nbrs = sorted(
                (v, mol.bonds[bi].order.value) for v, bi in mol.neighbors(ri)
                if (mi, v) not in matched_r and mol.atoms[v].atom_map is None)
            p_nbrs = sorted(
                (v, product.bonds[bi].order.value)
                for v, bi in product.neighbors(pi)
                if v not in matched_p and product.atoms[v].atom_map is None)
            for rv, rorder in r_nbrs:
                hit = next(
                    (pv for pv, porder in p_nbrs
                     if pv not in matched_p and porder == rorder
                     and product.atoms[pv].element == mol.atoms[rv].element),
                    None)
                if hit is not None:
                    pairs.append(((mi, rv), hit))
                    matched_r.add((mi, rv))
                    matched_p.add(hit)
                    grown += 1
                    changed = True
    return grown


def reaction_hash(r: ReactionRecord) -> str:
    key = ".".join(sorted(m.canonical() for m in r.reactants))
    key += ">>" + ".".join(sorted(p.canonical() for p in r.products))
    return hashlib.sha256(key.encode()).hexdigest()


# ---------------------------------------------------------------------------
# splits

def build_hard_split(
    reactions: list[ReactionRecord],
    library: TemplateLibrary,
    rarity_cutoff: int = DEFAULT_RARITY_CUTOFF,
) -> tuple[list[ReactionRecord], list[ReactionRecord]]:
    """Partition by template rarity: reactions whose template occurs at
    most ``rarity_cutoff`` times (or is unknown) go to the hard test set.
    Duplicate reactions (by reaction hash) keep only their first copy."""
    seen: set[str] = set()
    train, hard = [], []
    for r in reactions:
        h = reaction_hash(r)
        if h in seen:
            continue
        seen.add(h)
        count = library.lookup_hash(r.template_hash) if r.template_hash else None
        if count is None or count <= rarity_cutoff:
            hard.append(r)
        else:
            train.append(r)
    return train, hard


def split_by_molweight(
    reactions: list[ReactionRecord],
    threshold_da: float = DEFAULT_MW_THRESHOLD,
) -> tuple[list[ReactionRecord], list[ReactionRecord]]:
    """Product molecular weight above the threshold lands in the OOD test
    side, the rest in train."""
    train, ood = [], []
    for r in reactions:
        if molecular_weight(r.product) > threshold_da:
            ood.append(r)
        else:
            train.append(r)
    return train, ood


# ---------------------------------------------------------------------------
# multi-step route construction

def build_routes(reactions: list[ReactionRecord]) -> list[RouteTree]:
    """Chain reactions within each patent into maximal synthesis trees.

    Single-step routes are dropped, looped routes (a molecule recurring on
    its own ancestor path) are dropped, duplicates are removed by route
    hash, and any route embedded in another retained route is removed.
    """
    by_patent: dict[str, list[ReactionRecord]] = {}
    for r in reactions:
        by_patent.setdefault(r.patent_id or r.id, []).append(r)

    routes: list[RouteTree] = []
    for patent in sorted(by_patent):
        routes.extend(_routes_for_patent(by_patent[patent]))

    seen: set[str] = set()
    unique: list[RouteTree] = []
    for route in routes:
        h = route.route_hash()
        if h not in seen:
            seen.add(h)
            unique.append(route)

    kept: list[RouteTree] = []
    for i, route in enumerate(unique):
        embedded = any(
            j != i and _is_subroute(route.root, other.root)
            for j, other in enumerate(unique))
        if not embedded:
            kept.append(route)
    return kept


def _routes_for_patent(records: list[ReactionRecord]) -> list[RouteTree]:
    producers: dict[str, ReactionRecord] = {}
    consumed: set[str] = set()
    for r in sorted(records, key=lambda x: x.id):
        if len(r.products) != 1:
            continue
        producers.setdefault(r.product.canonical(), r)
    for r in producers.values():
        consumed |= {m.canonical() for m in r.reactants}

    roots = [smiles for smiles in producers if smiles not in consumed]
    out: list[RouteTree] = []
    for root_smiles in sorted(roots):
        node, ok = _grow_route(root_smiles, producers, ancestors=set())
        if ok:
            route = RouteTree(node)
            if route.length >= 2:
                out.append(route)
    return out


def _grow_route(smiles: str, producers: dict[str, ReactionRecord],
                ancestors: set[str]) -> tuple[RouteNode, bool]:
    node = RouteNode(smiles)
    rec = producers.get(smiles)
    if rec is None:
        return node, True
    if smiles in ancestors:
        return node, False  # loop: the whole route is discarded
    children = []
    for m in sorted(rec.reactants, key=lambda x: x.canonical()):
        child, ok = _grow_route(m.canonical(), producers,
                                ancestors | {smiles})
        if not ok:
            return node, False
        children.append(child)
    node.step = RouteStep(
        template_smarts=rec.template_smarts or "",
        template_hash=rec.template_hash or "",
        nodes=tuple(children),
    )
    return node, True


def _is_subroute(x: RouteNode, y_root: RouteNode) -> bool:
    """True when x's tree is obtainable from a subtree of y by pruning."""
    return any(_embeds_as_prefix(x, n) for n in y_root.walk())


def _embeds_as_prefix(x: RouteNode, y: RouteNode) -> bool:
    if x.smiles != y.smiles:
        return False
    if x.step is None:
        return True
    if y.step is None:
        return False
    xs = sorted(x.step.nodes, key=lambda n: n.smiles)
    ys = sorted(y.step.nodes, key=lambda n: n.smiles)
    if [n.smiles for n in xs] != [n.smiles for n in ys]:
        return False
    return _match_children(xs, ys)


def _match_children(xs: list[RouteNode], ys: list[RouteNode]) -> bool:
    """Bijective prefix-embedding between child lists (same label multiset;
    at most a handful of children, so backtracking is cheap)."""
    if not xs:
        return True
    head = xs[0]
    for i, candidate in enumerate(ys):
        if candidate.smiles == head.smiles and _embeds_as_prefix(head, candidate):
            if _match_children(xs[1:], ys[:i] + ys[i + 1 :]):
                return True
    return False


def _serial(node: RouteNode) -> str:
    if node.step is None:
        return f"({node.smiles})"
    return f"({node.smiles}{''.join(sorted(_serial(c) for c in node.step.nodes))})"


# ---------------------------------------------------------------------------
# JSONL streaming

def read_reaction_jsonl(path):
    """Yield (line number, record-or-None, error-or-None) triples."""
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield ln, parse_reaction_record(json.loads(line)), None
            except (KeyError, ValueError) as e:
                yield ln, None, e


def write_reaction_jsonl(path, records: list[ReactionRecord]) -> None:
    with open(path, "w") as fh:
        for r in records:
            rec = {"id": r.id, "rxn_smiles": r.raw}
            if r.patent_id:
                rec["patent_id"] = r.patent_id
            if r.template_smarts:
                rec["template"] = r.template_smarts
            if r.template_hash:
                rec["template_hash"] = r.template_hash
            fh.write(json.dumps(rec) + "\n")

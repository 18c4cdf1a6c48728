"""Retro reaction templates: parse, apply, extract, hash, library.

A template is stored retro-style, ``product_pattern >> reactant_patterns``.
Application matches the product pattern in a target molecule and rewrites
each match site into one candidate reactant set; extraction derives a
template from an atom-mapped reaction by diffing the two sides around the
reaction center.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .chem.mol import (
    Atom,
    Bond,
    BondOrder,
    Molecule,
    bonded_valence,
    implicit_hydrogens,
)
from .chem.parse import perceive_aromaticity
from .chem.smarts import (
    AtomQuery,
    BondQueryKind,
    PatternBond,
    PatternGraph,
    parse_smarts,
    pattern_canonical_forms,
)
from .chem.match import find_matches


class TemplateError(ValueError):
    pass


class InvalidTemplateError(TemplateError):
    pass


class NoMappedAtomsError(TemplateError):
    pass


class InconsistentMappingError(TemplateError):
    pass


class EmptyReactionCenterError(TemplateError):
    pass


class RewriteConflictError(Exception):
    """A rewrite site is chemically inapplicable; the site is skipped."""


@dataclass(frozen=True)
class RetroTemplate:
    product_pattern: PatternGraph
    reactant_patterns: tuple[PatternGraph, ...]
    source_smarts: str

    def __post_init__(self):
        if self.product_pattern.num_atoms == 0 or not self.reactant_patterns:
            raise InvalidTemplateError("both template sides need atoms")
        product_maps = set(self.product_pattern.atom_maps())
        seen: dict[int, int] = {}
        for ri, rp in enumerate(self.reactant_patterns):
            for m in rp.atom_maps():
                if m in seen:
                    raise InvalidTemplateError(
                        f"atom map {m} appears in two reactant patterns")
                seen[m] = ri
        for m in product_maps:
            if m not in seen:
                raise InvalidTemplateError(
                    f"product atom map {m} missing from reactant side")
        for m in seen:
            if m not in product_maps:
                raise InvalidTemplateError(
                    f"reactant atom map {m} missing from product side")


@dataclass(frozen=True)
class ReactantSet:
    """Reactant molecules of one disconnection, deduplicated and sorted."""

    molecules: tuple[Molecule, ...]

    @classmethod
    def from_molecules(cls, mols) -> "ReactantSet":
        by_canon: dict[str, Molecule] = {}
        for m in mols:
            by_canon.setdefault(m.canonical(), m)
        if not by_canon:
            raise TemplateError("empty reactant set")
        return cls(tuple(by_canon[c] for c in sorted(by_canon)))

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(m.canonical() for m in self.molecules)

    def __eq__(self, other):
        if not isinstance(other, ReactantSet):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)


def _split_top_level(text: str, sep: str) -> list[str]:
    parts, depth_b, buf = [], 0, []
    for ch in text:
        if ch == "[":
            depth_b += 1
        elif ch == "]":
            depth_b -= 1
        if ch == sep and depth_b == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return parts


def parse_retro_template(smarts: str) -> RetroTemplate:
    """Parse ``product>>reactant1.reactant2`` retro SMARTS."""
    halves = smarts.split(">>")
    if len(halves) != 2:
        raise InvalidTemplateError(f"expected one '>>' in {smarts!r}")
    product = parse_smarts(halves[0])
    reactant_parts = [p for p in _split_top_level(halves[1], ".") if p]
    if not reactant_parts:
        raise InvalidTemplateError("no reactant patterns")
    reactants = tuple(parse_smarts(p) for p in reactant_parts)
    return RetroTemplate(product, reactants, smarts)


# ---------------------------------------------------------------------------
# canonical form and hashing

def canonical_template_smarts(t: RetroTemplate) -> str:
    """Canonical SMARTS: maps renumbered by canonical traversal of the
    product side, reactant patterns sorted; minimal over product-side
    automorphisms."""
    no_maps = {i: None for i in range(t.product_pattern.num_atoms)}
    _, payloads = pattern_canonical_forms(
        t.product_pattern, no_maps, maps_in_invariant=False)

    best: str | None = None
    for ranks, order in payloads:
        renumber: dict[int, int] = {}
        for atom_idx in order:
            old = t.product_pattern.atoms[atom_idx].atom_map
            if old is not None and old not in renumber:
                renumber[old] = len(renumber) + 1
        product_maps = {
            i: (renumber.get(q.atom_map) if q.atom_map is not None else None)
            for i, q in enumerate(t.product_pattern.atoms)
        }
        from .chem.canon import write_graph
        from .chem.smarts import _BOND_TOKEN, query_token

        pp = t.product_pattern
        adj_edges = [list(pp.neighbors(i)) for i in range(pp.num_atoms)]
        product_str, _ = write_graph(
            pp.num_atoms, adj_edges, list(ranks),
            atom_token=lambda u: query_token(pp.atoms[u], product_maps.get(u)),
            bond_token=lambda e: _BOND_TOKEN[pp.bonds[e].kind],
        )
        reactant_strs = []
        for rp in t.reactant_patterns:
            rp_maps = {
                i: (renumber.get(q.atom_map) if q.atom_map is not None else None)
                for i, q in enumerate(rp.atoms)
            }
            s, _ = pattern_canonical_forms(rp, rp_maps, maps_in_invariant=True)
            reactant_strs.append(s)
        candidate = product_str + ">>" + ".".join(sorted(reactant_strs))
        if best is None or candidate < best:
            best = candidate
    assert best is not None
    return best


def template_hash(t: RetroTemplate) -> str:
    """SHA-256 hex of the canonical template SMARTS."""
    return hashlib.sha256(canonical_template_smarts(t).encode()).hexdigest()


def template_hash_of_smarts(smarts: str) -> str:
    return template_hash(parse_retro_template(smarts))


# ---------------------------------------------------------------------------
# application (graph rewriting)

def apply_template(
    t: RetroTemplate,
    product: Molecule,
    diagnostics: list[str] | None = None,
) -> list[ReactantSet]:
    """One ReactantSet per match site of the product pattern.

    Sites raising a rewrite conflict (carried atom exceeding valence) or
    regenerating the product itself are skipped, not fatal.
    """
    out: list[ReactantSet] = []
    for match in find_matches(t.product_pattern, product):
        try:
            mols = _rewrite_site(t, product, match)
        except RewriteConflictError as e:
            if diagnostics is not None:
                diagnostics.append(f"site {match}: {e}")
            continue
        rs = ReactantSet.from_molecules(mols)
        if product.canonical() in rs.key:
            if diagnostics is not None:
                diagnostics.append(f"site {match}: regenerates the product")
            continue
        out.append(rs)
    return out


def _rewrite_site(
    t: RetroTemplate, product: Molecule, match: tuple[int, ...]
) -> list[Molecule]:
    pp = t.product_pattern
    matched = set(match)
    pat_of_mol = {mi: pi for pi, mi in enumerate(match)}
    anchor_atom: dict[int, int] = {}
    for pi, q in enumerate(pp.atoms):
        if q.atom_map is not None:
            anchor_atom[q.atom_map] = match[pi]
    if not anchor_atom:
        raise RewriteConflictError("template has no mapped anchors")

    rp_of_map = {m: ri for ri, rp in enumerate(t.reactant_patterns)
                 for m in rp.atom_maps()}

    # nearest mapped anchor for every carried (unmatched) product atom;
    # ties by lowest anchor map number
    assign: dict[int, int] = {}
    best: dict[int, tuple[int, int]] = {}
    for amap in sorted(anchor_atom):
        dist = _bfs_distances(product, anchor_atom[amap])
        for u in range(product.num_atoms):
            if u in matched or dist[u] < 0:
                continue
            cand = (dist[u], amap)
            if u not in best or cand < best[u]:
                best[u] = cand
    fallback = min(anchor_atom)
    for u in range(product.num_atoms):
        if u not in matched:
            amap = best[u][1] if u in best else fallback
            assign[u] = rp_of_map[amap]

    fragments = []
    for ri, rp in enumerate(t.reactant_patterns):
        fragments.append(_build_fragment(
            t, product, match, pat_of_mol, anchor_atom, rp_of_map, assign, ri))
    return fragments


def _bfs_distances(mol: Molecule, start: int) -> list[int]:
    dist = [-1] * mol.num_atoms
    dist[start] = 0
    queue = [start]
    while queue:
        u = queue.pop(0)
        for v, _ in mol.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _build_fragment(
    t: RetroTemplate,
    product: Molecule,
    match: tuple[int, ...],
    pat_of_mol: dict[int, int],
    anchor_atom: dict[int, int],
    rp_of_map: dict[int, int],
    assign: dict[int, int],
    ri: int,
) -> Molecule:
    rp = t.reactant_patterns[ri]
    pp = t.product_pattern
    matched = set(match)

    elements: list[str] = []
    charges: list[int] = []
    hydrogens: list[int | None] = []  # None => recompute from valence
    aromatics: list[bool] = []
    idx_of_pattern: dict[int, int] = {}
    idx_of_carried: dict[int, int] = {}

    for pi, q in enumerate(rp.atoms):
        if q.atom_map is not None and q.atom_map in anchor_atom:
            src = product.atoms[anchor_atom[q.atom_map]]
            elements.append(q.element or src.element)
            aromatics.append(q.aromatic if q.aromatic is not None else src.aromatic)
            charges.append(q.charge if q.charge is not None else src.charge)
            hydrogens.append(q.hydrogens)
        else:
            if q.element is None:
                raise RewriteConflictError("cannot instantiate wildcard atom")
            elements.append(q.element)
            aromatics.append(bool(q.aromatic))
            charges.append(q.charge if q.charge is not None else 0)
            hydrogens.append(q.hydrogens)
        idx_of_pattern[pi] = len(elements) - 1

    for u in sorted(u for u, r in assign.items() if r == ri):
        src = product.atoms[u]
        elements.append(src.element)
        charges.append(src.charge)
        hydrogens.append(src.explicit_h)
        aromatics.append(src.aromatic)
        idx_of_carried[u] = len(elements) - 1

    bonds: list[tuple[int, int, BondOrder]] = []
    bond_keys: set[tuple[int, int]] = set()

    def add_bond(a: int, b: int, order: BondOrder):
        key = (a, b) if a < b else (b, a)
        if key not in bond_keys:
            bond_keys.add(key)
            bonds.append((a, b, order))

    for pb in rp.bonds:
        a, b = idx_of_pattern[pb.a1], idx_of_pattern[pb.a2]
        add_bond(a, b, _resolve_bond_kind(
            pb, rp, product, anchor_atom, aromatics, a, b))

    for bond in product.bonds:
        u, v = bond.a1, bond.a2
        u_c, v_c = u in idx_of_carried, v in idx_of_carried
        if u_c and v_c:
            add_bond(idx_of_carried[u], idx_of_carried[v], bond.order)
        elif u_c or v_c:
            c, m = (u, v) if u_c else (v, u)
            if m in matched:
                q = pp.atoms[pat_of_mol[m]]
                if q.atom_map is not None and rp_of_map.get(q.atom_map) == ri:
                    add_bond(idx_of_carried[c],
                             idx_of_pattern[rp.atom_maps()[q.atom_map]],
                             bond.order)
                # matched-but-unmapped neighbor: atom deleted, bond vanishes
        else:
            if u in matched and v in matched:
                qu, qv = pp.atoms[pat_of_mol[u]], pp.atoms[pat_of_mol[v]]
                if pp.bond_between(pat_of_mol[u], pat_of_mol[v]) is not None:
                    continue  # fate decided by the reactant patterns
                if (qu.atom_map is not None and qv.atom_map is not None
                        and rp_of_map.get(qu.atom_map) == ri
                        and rp_of_map.get(qv.atom_map) == ri):
                    add_bond(idx_of_pattern[rp.atom_maps()[qu.atom_map]],
                             idx_of_pattern[rp.atom_maps()[qv.atom_map]],
                             bond.order)

    orders_at: list[list[BondOrder]] = [[] for _ in elements]
    for a, b, order in bonds:
        orders_at[a].append(order)
        orders_at[b].append(order)

    atoms = []
    for i, el in enumerate(elements):
        h = hydrogens[i]
        if h is None:
            h = implicit_hydrogens(el, charges[i],
                                   bonded_valence(el, orders_at[i]))
            if h is None:
                raise RewriteConflictError(
                    f"{el} exceeds valence after rewrite")
        atoms.append(Atom(el, i, charges[i], h, aromatics[i], None))

    mol = Molecule(tuple(atoms), tuple(Bond(a, b, o) for a, b, o in bonds))
    return perceive_aromaticity(mol)


def _resolve_bond_kind(
    pb: PatternBond,
    rp: PatternGraph,
    product: Molecule,
    anchor_atom: dict[int, int],
    aromatics: list[bool],
    a: int,
    b: int,
) -> BondOrder:
    kind = pb.kind
    if kind is BondQueryKind.SINGLE:
        return BondOrder.SINGLE
    if kind is BondQueryKind.DOUBLE:
        return BondOrder.DOUBLE
    if kind is BondQueryKind.TRIPLE:
        return BondOrder.TRIPLE
    if kind is BondQueryKind.AROMATIC:
        return BondOrder.AROMATIC
    if kind is BondQueryKind.DEFAULT:
        return BondOrder.AROMATIC if aromatics[a] and aromatics[b] else BondOrder.SINGLE
    # ANY: keep the product's order when both endpoints anchor a product bond
    m1 = rp.atoms[pb.a1].atom_map
    m2 = rp.atoms[pb.a2].atom_map
    if m1 in anchor_atom and m2 in anchor_atom:
        pbond = product.bond_between(anchor_atom[m1], anchor_atom[m2])
        if pbond is not None:
            return pbond.order
    return BondOrder.SINGLE


# ---------------------------------------------------------------------------
# extraction from mapped reactions

def extract_template(
    reactants: list[Molecule], product: Molecule, radius: int = 1
) -> RetroTemplate:
    """Diff the mapped reaction and cut a retro template around the center.

    The center holds every atom whose charge, hydrogen count, or bond
    environment differs between sides, closed over multiple bonds (a
    carbonyl travels with its carbon); the product pattern then grows by
    ``radius`` bonds. The returned template is already in canonical form.
    """
    pmap = _map_index(product, "product")
    rmaps: dict[int, tuple[int, int]] = {}
    for mi, mol in enumerate(reactants):
        for m, idx in _map_index(mol, f"reactant {mi}").items():
            if m in rmaps:
                raise InconsistentMappingError(
                    f"atom map {m} on two reactant atoms")
            rmaps[m] = (mi, idx)
    if not pmap or not rmaps:
        raise NoMappedAtomsError("reaction sides carry no atom maps")

    changed: set[int] = set()
    for m in pmap.keys() & rmaps.keys():
        pa = product.atoms[pmap[m]]
        mi, idx = rmaps[m]
        ra = reactants[mi].atoms[idx]
        if (pa.charge != ra.charge or pa.explicit_h != ra.explicit_h
                or _bond_signature(product, pmap[m])
                != _bond_signature(reactants[mi], idx)):
            changed.add(m)
    for m in pmap.keys() - rmaps.keys():  # product orphans
        changed.add(m)
    if not changed:
        raise EmptyReactionCenterError("no atoms change between sides")

    center = {pmap[m] for m in changed if m in pmap}
    center = _close_over_multiple_bonds(product, center)
    included = _grow(product, center, radius)
    included = _close_over_multiple_bonds(product, included)
    included_maps = {
        product.atoms[i].atom_map for i in included
        if product.atoms[i].atom_map is not None
    }

    reactant_patterns = []
    used_maps: set[int] = set()
    for mi, mol in enumerate(reactants):
        core = [i for i, a in enumerate(mol.atoms)
                if a.atom_map is not None and a.atom_map in included_maps
                and a.atom_map in rmaps]
        if not core:
            continue
        extras = _unmapped_appendage(mol, core, set(pmap))
        pattern = _pattern_from_atoms(mol, sorted(core) + sorted(extras),
                                      mapped=set(core))
        used_maps |= {mol.atoms[i].atom_map for i in core}
        reactant_patterns.append(pattern)
    if not reactant_patterns:
        raise EmptyReactionCenterError("reaction center has no reactant atoms")

    # product atoms whose map no reactant holds are emitted unmapped
    product_pattern = _pattern_from_atoms(
        product, sorted(included),
        mapped={i for i in included
                if product.atoms[i].atom_map in used_maps})

    raw = RetroTemplate(product_pattern, tuple(reactant_patterns), "")
    canonical = canonical_template_smarts(raw)
    return parse_retro_template(canonical)


def _map_index(mol: Molecule, label: str) -> dict[int, int]:
    out: dict[int, int] = {}
    for i, a in enumerate(mol.atoms):
        if a.atom_map is not None:
            if a.atom_map in out:
                raise InconsistentMappingError(
                    f"atom map {a.atom_map} duplicated on {label}")
            out[a.atom_map] = i
    return out


def _bond_signature(mol: Molecule, idx: int):
    sig = []
    for v, bi in mol.neighbors(idx):
        nbr = mol.atoms[v]
        order = mol.bonds[bi].order.value
        if nbr.atom_map is not None:
            sig.append((0, nbr.atom_map, order))
        else:
            sig.append((1, nbr.element, order))
    return tuple(sorted(sig))


def _close_over_multiple_bonds(mol: Molecule, atoms: set[int]) -> set[int]:
    out = set(atoms)
    frontier = list(atoms)
    while frontier:
        u = frontier.pop()
        for v, bi in mol.neighbors(u):
            if v not in out and mol.bonds[bi].order in (
                    BondOrder.DOUBLE, BondOrder.TRIPLE):
                out.add(v)
                frontier.append(v)
    return out


def _grow(mol: Molecule, seed: set[int], radius: int) -> set[int]:
    out = set(seed)
    frontier = set(seed)
    for _ in range(radius):
        nxt = set()
        for u in frontier:
            for v, _ in mol.neighbors(u):
                if v not in out:
                    nxt.add(v)
        out |= nxt
        frontier = nxt
    return out


def _unmapped_appendage(
    mol: Molecule, core: list[int], product_maps: set[int]
) -> set[int]:
    """Unmapped atoms (or atoms with stale maps absent from the product)
    reachable from the core without passing through mapped atoms."""
    def is_free(i: int) -> bool:
        m = mol.atoms[i].atom_map
        return m is None or m not in product_maps

    out: set[int] = set()
    frontier = list(core)
    while frontier:
        u = frontier.pop()
        for v, _ in mol.neighbors(u):
            if v not in out and v not in core and is_free(v):
                out.add(v)
                frontier.append(v)
    return out


def _pattern_from_atoms(
    mol: Molecule, atoms: list[int], mapped: set[int]
) -> PatternGraph:
    remap = {old: new for new, old in enumerate(atoms)}
    queries = []
    for i in atoms:
        a = mol.atoms[i]
        if i in mapped:
            queries.append(AtomQuery(
                element=a.element, aromatic=a.aromatic,
                charge=a.charge if a.charge != 0 else None,
                atom_map=a.atom_map))
        else:
            queries.append(AtomQuery(
                element=a.element, aromatic=a.aromatic,
                charge=a.charge if a.charge != 0 else None,
                hydrogens=a.explicit_h))
    bonds = []
    for b in mol.bonds:
        if b.a1 in remap and b.a2 in remap:
            bonds.append(PatternBond(remap[b.a1], remap[b.a2],
                                     _query_kind_for(mol, b)))
    return PatternGraph(tuple(queries), tuple(bonds))


def _query_kind_for(mol: Molecule, b: Bond) -> BondQueryKind:
    if b.order is BondOrder.DOUBLE:
        return BondQueryKind.DOUBLE
    if b.order is BondOrder.TRIPLE:
        return BondQueryKind.TRIPLE
    if b.order is BondOrder.AROMATIC:
        return BondQueryKind.AROMATIC
    if mol.atoms[b.a1].aromatic and mol.atoms[b.a2].aromatic:
        return BondQueryKind.SINGLE  # explicit: default would match aromatic
    return BondQueryKind.DEFAULT


# ---------------------------------------------------------------------------
# library

class TemplateLibrary:
    """hash -> (canonical SMARTS, occurrence count)."""

    def __init__(self):
        self._entries: dict[str, tuple[str, int]] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, h: str) -> bool:
        return h in self._entries

    def add(self, smarts: str, count: int = 1) -> str:
        if count < 1:
            raise ValueError("count must be >= 1")
        t = parse_retro_template(smarts)
        canonical = canonical_template_smarts(t)
        h = hashlib.sha256(canonical.encode()).hexdigest()
        if h in self._entries:
            old_smarts, old_count = self._entries[h]
            self._entries[h] = (old_smarts, old_count + count)
        else:
            self._entries[h] = (canonical, count)
        return h

    def lookup(self, t: RetroTemplate) -> int | None:
        """Occurrence count if known, None if novel."""
        return self.lookup_hash(template_hash(t))

    def lookup_hash(self, h: str) -> int | None:
        entry = self._entries.get(h)
        return entry[1] if entry else None

    def entries(self):
        for h, (smarts, count) in sorted(self._entries.items()):
            yield h, smarts, count

    def filtered(self, min_count: int) -> "TemplateLibrary":
        lib = TemplateLibrary()
        for h, (smarts, count) in self._entries.items():
            if count >= min_count:
                lib._entries[h] = (smarts, count)
        return lib

    def save(self, path) -> None:
        with open(path, "w") as fh:
            for h, smarts, count in self.entries():
                fh.write(json.dumps(
                    {"smarts": smarts, "hash": h, "count": count}) + "\n")

    @classmethod
    def load(cls, path) -> "TemplateLibrary":
        lib = cls()
        with open(path) as fh:
            for ln, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                h = template_hash_of_smarts(rec["smarts"])
                if h != rec["hash"]:
                    raise TemplateError(
                        f"{path}:{ln}: stored hash does not match SMARTS")
                lib._entries[h] = (rec["smarts"], int(rec["count"]))
        return lib

"""Subgraph matching of SMARTS-subset patterns onto molecules.

Backtracking search in the VF2 style: pattern atoms are placed in a
connectivity-aware order and candidates are pruned through the already
matched neighborhood. Embeddings that cover the same molecule atoms with
the same pattern symmetry classes are collapsed to one match, so a
symmetric pattern never double-counts a site.
"""

from __future__ import annotations

from .mol import Bond, BondOrder, Molecule
from .smarts import AtomQuery, BondQueryKind, PatternGraph
from .canon import refine_partition

Match = tuple[int, ...]  # molecule atom index per pattern atom


def atom_matches(q: AtomQuery, mol: Molecule, idx: int) -> bool:
    a = mol.atoms[idx]
    if q.element is not None and q.element != a.element:
        return False
    if q.aromatic is not None and q.aromatic != a.aromatic:
        return False
    if q.charge is not None and q.charge != a.charge:
        return False
    if q.hydrogens is not None and q.hydrogens != a.explicit_h:
        return False
    if q.degree is not None and q.degree != mol.degree(idx):
        return False
    return True


def bond_matches(kind: BondQueryKind, bond: Bond) -> bool:
    if kind is BondQueryKind.ANY:
        return True
    if kind is BondQueryKind.DEFAULT:
        return bond.order in (BondOrder.SINGLE, BondOrder.AROMATIC)
    return bond.order.value == kind.value


def pattern_symmetry_classes(pattern: PatternGraph) -> list[int]:
    """Automorphism-style classes from neighborhood refinement.

    Atom maps are excluded from the invariant: [C:1][C:2] is symmetric as
    a query even though its maps differ.
    """
    n = pattern.num_atoms
    adj = [[(v, pattern.bonds[e].kind.value) for v, e in pattern.neighbors(i)]
           for i in range(n)]
    init = [
        (q.element or "", -1 if q.aromatic is None else int(q.aromatic),
         q.charge if q.charge is not None else 99,
         q.hydrogens if q.hydrogens is not None else -1,
         q.degree if q.degree is not None else -1)
        for q in pattern.atoms
    ]
    return refine_partition(n, adj, init)


def _placement_order(pattern: PatternGraph) -> list[int]:
    """Connectivity-first order: after the first atom of each component,
    every atom has at least one earlier neighbor."""
    n = pattern.num_atoms
    seen: set[int] = set()
    order: list[int] = []
    for start in range(n):
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        while queue:
            u = queue.pop(0)
            order.append(u)
            for v, _ in pattern.neighbors(u):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
    return order


def find_matches(pattern: PatternGraph, mol: Molecule) -> list[Match]:
    """All distinct embeddings of ``pattern`` in ``mol``.

    Non-induced semantics: molecule bonds outside the pattern are ignored.
    Results are deduplicated by (covered atom set, symmetry-class
    assignment) and sorted lexicographically by the mapped indices.
    """
    np_, nm = pattern.num_atoms, mol.num_atoms
    if np_ == 0 or np_ > nm:
        return []

    order = _placement_order(pattern)
    classes = pattern_symmetry_classes(pattern)
    # pattern bonds from each atom to earlier-placed atoms
    placed_pos = {a: i for i, a in enumerate(order)}
    back_bonds: list[list[tuple[int, BondQueryKind]]] = []
    for pos, p in enumerate(order):
        back = []
        for v, e in pattern.neighbors(p):
            if placed_pos[v] < pos:
                back.append((v, pattern.bonds[e].kind))
        back_bonds.append(back)

    assignment: dict[int, int] = {}
    used: set[int] = set()
    raw: list[Match] = []

    def place(pos: int):
        if pos == np_:
            raw.append(tuple(assignment[p] for p in range(np_)))
            return
        p = order[pos]
        q = pattern.atoms[p]
        back = back_bonds[pos]
        if back:
            # candidates restricted to neighbors of one matched anchor
            anchor, _ = back[0]
            candidates = sorted(v for v, _ in mol.neighbors(assignment[anchor]))
        else:
            candidates = range(nm)
        for m in candidates:
            if m in used or not atom_matches(q, mol, m):
                continue
            ok = True
            for v, kind in back:
                b = mol.bond_between(m, assignment[v])
                if b is None or not bond_matches(kind, b):
                    ok = False
                    break
            if not ok:
                continue
            assignment[p] = m
            used.add(m)
            place(pos + 1)
            used.discard(m)
            del assignment[p]

    place(0)

    seen_keys: set[frozenset] = set()
    out: list[Match] = []
    for m in sorted(raw):
        key = frozenset((mi, classes[pi]) for pi, mi in enumerate(m))
        if key not in seen_keys:
            seen_keys.add(key)
            out.append(m)
    return out

"""Canonical string generation for labeled graphs.

The same machinery canonicalizes molecules (SMILES) and pattern graphs
(SMARTS): iterative neighborhood refinement produces a stable partition,
remaining ties are broken by individualizing one atom per class and
keeping the lexicographically smallest emitted string. Isomorphic inputs
therefore always emit the same string.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Callable

from .mol import ORGANIC_SUBSET, BondOrder, Molecule, implicit_hydrogens

Adjacency = list[list[tuple[int, int]]]  # per atom: (neighbor, edge id)

_MAX_LEAVES = 20000


def refine_partition(n: int, adj: Adjacency, init: list) -> list[int]:
    """Dense ranks 0..k-1 after neighborhood refinement from ``init``."""
    order = sorted(set(init))
    remap = {v: r for r, v in enumerate(order)}
    ranks = [remap[v] for v in init]
    while True:
        inv = [
            (ranks[i], tuple(sorted((code, ranks[j]) for j, code in adj[i])))
            for i in range(n)
        ]
        order = sorted(set(inv))
        remap = {v: r for r, v in enumerate(order)}
        new = [remap[inv[i]] for i in range(n)]
        if new == ranks:
            return ranks
        ranks = new


def canonical_forms(
    n: int,
    adj: Adjacency,
    init: list,
    emit: Callable[[list[int]], tuple[str, tuple]],
) -> tuple[str, list[tuple]]:
    """Minimal emission over all tie-breaking choices.

    ``emit`` maps a fully discrete rank vector to (string, payload); the
    payload of every distinct optimal emission is returned alongside the
    minimal string (automorphic graphs can realize the same string via
    several atom orders, which template canonicalization must see).
    """
    best: list = [None, []]
    leaves = [0]

    def search(ranks: list[int]):
        ranks = refine_partition(n, adj, [(r,) for r in ranks])
        if leaves[0] >= _MAX_LEAVES:
            return
        if n == 0 or max(ranks) == n - 1:
            leaves[0] += 1
            s, payload = emit(ranks)
            if best[0] is None or s < best[0]:
                best[0] = s
                best[1] = [payload]
            elif s == best[0] and payload not in best[1]:
                best[1].append(payload)
            return
        counts = Counter(ranks)
        target = min(r for r, c in counts.items() if c > 1)
        for a in (i for i in range(n) if ranks[i] == target):
            search([(2 * r + (0 if i == a else 1)) if r == target else 2 * r
                    for i, r in enumerate(ranks)])

    start = refine_partition(n, adj, init)
    search(start)
    return best[0], best[1]


def write_graph(
    n: int,
    adj: Adjacency,
    ranks: list[int],
    atom_token: Callable[[int], str],
    bond_token: Callable[[int], str],
) -> tuple[str, tuple[int, ...]]:
    """Emit a SMILES-shaped string following canonical ranks.

    Components are emitted separately (start = lowest-rank atom, DFS with
    neighbors in rank order, ring-closure digits on back edges) and joined
    with '.' in sorted order. Returns the string and the atom visitation
    order aligned with it.
    """
    visited = [False] * n
    used_edges: set[int] = set()
    parts: list[tuple[str, list[int]]] = []
    digit_counter = [0]

    for start in sorted(range(n), key=lambda i: ranks[i]):
        if visited[start]:
            continue
        order: list[int] = []
        children: dict[int, list[tuple[int, int]]] = defaultdict(list)
        ring_open: dict[int, list[tuple[int, int]]] = defaultdict(list)
        ring_close: dict[int, list[tuple[int, int]]] = defaultdict(list)

        def nbr_iter(u: int):
            return iter(sorted(adj[u], key=lambda t: ranks[t[0]]))

        visited[start] = True
        order.append(start)
        stack: list[tuple[int, int | None, object]] = [(start, None, nbr_iter(start))]
        while stack:
            u, parent_edge, it = stack[-1]
            pushed = False
            for v, e in it:
                if e == parent_edge or e in used_edges:
                    continue
                used_edges.add(e)
                if visited[v]:
                    digit_counter[0] += 1
                    d = digit_counter[0]
                    ring_open[v].append((d, e))
                    ring_close[u].append((d, e))
                    continue
                visited[v] = True
                order.append(v)
                children[u].append((v, e))
                stack.append((v, e, nbr_iter(v)))
                pushed = True
                break
            if not pushed:
                stack.pop()

        def render(u: int) -> str:
            out = [atom_token(u)]
            for d, e in ring_open.get(u, []):
                out.append(bond_token(e) + _ring_digit(d))
            for d, e in ring_close.get(u, []):
                out.append(bond_token(e) + _ring_digit(d))
            ch = children.get(u, [])
            for v, e in ch[:-1]:
                out.append("(" + bond_token(e) + render(v) + ")")
            if ch:
                v, e = ch[-1]
                out.append(bond_token(e) + render(v))
            return "".join(out)

        parts.append((render(start), order))

    parts.sort(key=lambda p: p[0])
    full_order: list[int] = []
    for _, order in parts:
        full_order.extend(order)
    return ".".join(p[0] for p in parts), tuple(full_order)


def _ring_digit(d: int) -> str:
    return str(d) if d <= 9 else f"%{d:02d}"


# ---------------------------------------------------------------------------
# molecule writer

def canonical_smiles(mol: Molecule) -> str:
    """Deterministic SMILES, identical for isomorphic graphs; no atom maps."""
    s, _ = _canonical_molecule(mol, include_maps=False)
    return s


def to_smiles(mol: Molecule, keep_maps: bool = False) -> str:
    """Canonical-order SMILES, optionally retaining atom maps."""
    s, _ = _canonical_molecule(mol, include_maps=keep_maps)
    return s


def _canonical_molecule(mol: Molecule, include_maps: bool) -> tuple[str, tuple]:
    n = mol.num_atoms
    adj_codes: Adjacency = [
        [(v, mol.bonds[e].order.value) for v, e in mol.neighbors(i)]
        for i in range(n)
    ]
    adj_edges: Adjacency = [list(mol.neighbors(i)) for i in range(n)]
    init = [
        (a.element, a.charge, mol.degree(i), a.explicit_h, a.aromatic)
        for i, a in enumerate(mol.atoms)
    ]

    def emit(ranks: list[int]) -> tuple[str, tuple]:
        return write_graph(
            n, adj_edges, ranks,
            atom_token=lambda u: _atom_token(mol, u, include_maps),
            bond_token=lambda e: _bond_token(mol, e),
        )

    s, _payloads = canonical_forms(n, adj_codes, init, emit)
    return s, ()


def _atom_token(mol: Molecule, u: int, include_maps: bool) -> str:
    a = mol.atoms[u]
    if a.aromatic:
        sym = a.element.lower()
        bare_allowed = sym in {"b", "c", "n", "o", "p", "s"}
    else:
        sym = a.element
        bare_allowed = a.element in ORGANIC_SUBSET
    default_h = implicit_hydrogens(a.element, a.charge, mol.bond_valence(u))
    if (bare_allowed and a.charge == 0 and default_h == a.explicit_h
            and not (include_maps and a.atom_map is not None)):
        return sym
    body = sym
    if a.explicit_h == 1:
        body += "H"
    elif a.explicit_h > 1:
        body += f"H{a.explicit_h}"
    body += _charge_token(a.charge)
    if include_maps and a.atom_map is not None:
        body += f":{a.atom_map}"
    return f"[{body}]"


def _charge_token(charge: int) -> str:
    if charge == 0:
        return ""
    sign = "+" if charge > 0 else "-"
    return sign if abs(charge) == 1 else f"{sign}{abs(charge)}"


def _bond_token(mol: Molecule, e: int) -> str:
    b = mol.bonds[e]
    if b.order is BondOrder.SINGLE:
        if mol.atoms[b.a1].aromatic and mol.atoms[b.a2].aromatic:
            return "-"
        return ""
    if b.order is BondOrder.AROMATIC:
        if mol.atoms[b.a1].aromatic and mol.atoms[b.a2].aromatic:
            return ""
        return ":"
    if b.order is BondOrder.DOUBLE:
        return "="
    return "#"

"""SMILES parser for the supported subset.

Supported: organic-subset atoms, bracket atoms (isotope, charge, H count,
atom map), branches, ring closures including %nn, aromatic lowercase,
dot-separated components. Stereo markers (/, \\, @) are parsed and
discarded with a warning. Kekule rings of size 5-6 are normalized to
aromatic after parsing so that C1=CC=CC=C1 and c1ccccc1 canonicalize
identically.
"""

from __future__ import annotations

import re
import warnings

from .mol import (
    AROMATIC_SYMBOLS,
    ELEMENTS,
    Atom,
    Bond,
    BondOrder,
    Molecule,
    bonded_valence,
    implicit_hydrogens,
)


class SmilesError(ValueError):
    """Parse failure; ``position`` is the 0-based offset of the bad token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnclosedRingError(SmilesError):
    pass


class UnbalancedParenthesesError(SmilesError):
    pass


class UnknownSymbolError(SmilesError):
    pass


class ValenceError(SmilesError):
    pass


_BOND_CHARS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}

_BRACKET_RE = re.compile(
    r"^(?P<isotope>\d+)?"
    r"(?P<symbol>\*|[A-Z][a-z]?|as|se|[bcnops])"
    r"(?P<chiral>@{1,2}(?:TH\d|AL\d|SP\d)?)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+\d+|-\d+|\++|-+)?"
    r"(?::(?P<map>\d+))?$"
)


class _PendingAtom:
    __slots__ = ("element", "aromatic", "charge", "hcount", "atom_map", "pos", "bracket")

    def __init__(self, element, aromatic, charge, hcount, atom_map, pos, bracket):
        self.element = element
        self.aromatic = aromatic
        self.charge = charge
        self.hcount = hcount  # None => assign implicit later
        self.atom_map = atom_map
        self.pos = pos
        self.bracket = bracket


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a Molecule."""
    if not text:
        raise UnknownSymbolError("empty SMILES", 0)

    atoms: list[_PendingAtom] = []
    bonds: list[tuple[int, int, BondOrder | None, int]] = []  # a1, a2, order, pos
    open_rings: dict[int, tuple[int, BondOrder | None, int]] = {}
    branch_stack: list[int | None] = []
    prev: int | None = None
    pending_order: BondOrder | None = None
    pending_pos = 0
    stereo_warned = False

    def add_atom(pa: _PendingAtom):
        nonlocal prev, pending_order
        idx = len(atoms)
        atoms.append(pa)
        if prev is not None:
            bonds.append((prev, idx, pending_order, pending_pos))
        elif pending_order is not None:
            raise UnknownSymbolError("bond symbol with no preceding atom", pending_pos)
        prev = idx
        pending_order = None

    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "(":
            if prev is None:
                raise UnbalancedParenthesesError("branch before any atom", i)
            branch_stack.append(prev)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise UnbalancedParenthesesError("unmatched ')'", i)
            prev = branch_stack.pop()
            i += 1
        elif ch == ".":
            if pending_order is not None:
                raise UnknownSymbolError("bond symbol before '.'", pending_pos)
            prev = None
            i += 1
        elif ch in _BOND_CHARS:
            if ch in ("/", "\\") and not stereo_warned:
                warnings.warn("stereo bond markers are ignored", stacklevel=2)
                stereo_warned = True
            pending_order = _BOND_CHARS[ch]
            pending_pos = i
            i += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                    raise UnknownSymbolError("'%' needs two digits", i)
                num = int(text[i + 1 : i + 3])
                width = 3
            else:
                num = int(ch)
                width = 1
            if prev is None:
                raise UnknownSymbolError("ring digit before any atom", i)
            if num in open_rings:
                other, open_order, open_pos = open_rings.pop(num)
                order = _resolve_ring_order(open_order, pending_order, i)
                if other == prev:
                    raise UnknownSymbolError(f"ring bond {num} to itself", i)
                bonds.append((other, prev, order, i))
            else:
                open_rings[num] = (prev, pending_order, i)
            pending_order = None
            i += width
        elif ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise UnknownSymbolError("unclosed '['", i)
            add_atom(_parse_bracket(text[i + 1 : end], i))
            i = end + 1
        else:
            # bare organic-subset atom, aromatic or aliphatic
            two = text[i : i + 2]
            if two in ("Cl", "Br"):
                add_atom(_PendingAtom(two, False, 0, None, None, i, False))
                i += 2
            elif ch in "BCNOPSFI":
                add_atom(_PendingAtom(ch, False, 0, None, None, i, False))
                i += 1
            elif ch in "bcnops":
                add_atom(_PendingAtom(ch.upper(), True, 0, None, None, i, False))
                i += 1
            elif ch == "*":
                raise UnknownSymbolError("wildcard '*' is not a molecule atom", i)
            elif ch == "@":
                if not stereo_warned:
                    warnings.warn("chirality markers are ignored", stacklevel=2)
                    stereo_warned = True
                i += 1
            else:
                raise UnknownSymbolError(f"unknown symbol {ch!r}", i)

    if branch_stack:
        raise UnbalancedParenthesesError("unclosed '('", n - 1)
    if open_rings:
        num, (_, _, pos) = sorted(open_rings.items())[0]
        raise UnclosedRingError(f"ring closure {num} never closed", pos)
    if pending_order is not None:
        raise UnknownSymbolError("dangling bond symbol", pending_pos)

    return _assemble(atoms, bonds)


def _parse_bracket(body: str, pos: int) -> _PendingAtom:
    m = _BRACKET_RE.match(body)
    if m is None:
        raise UnknownSymbolError(f"malformed bracket atom [{body}]", pos)
    sym = m.group("symbol")
    if sym == "*":
        raise UnknownSymbolError("wildcard '*' is not a molecule atom", pos)
    aromatic = sym[0].islower()
    element = sym.capitalize() if aromatic else sym
    if aromatic and sym not in AROMATIC_SYMBOLS:
        raise UnknownSymbolError(f"unknown aromatic symbol {sym!r}", pos)
    if element not in ELEMENTS:
        raise UnknownSymbolError(f"unknown element {element!r}", pos)
    if m.group("chiral"):
        warnings.warn("chirality markers are ignored", stacklevel=3)
    h = m.group("hcount")
    hcount = 0 if h is None else (1 if h == "H" else int(h[1:]))
    charge = _parse_charge(m.group("charge"))
    amap = int(m.group("map")) if m.group("map") else None
    if amap is not None and amap <= 0:
        raise UnknownSymbolError("atom map must be positive", pos)
    return _PendingAtom(element, aromatic, charge, hcount, amap, pos, True)


def _parse_charge(tok: str | None) -> int:
    if not tok:
        return 0
    if tok[0] == "+":
        return int(tok[1:]) if tok[1:].isdigit() else len(tok)
    return -int(tok[1:]) if tok[1:].isdigit() else -len(tok)


def _resolve_ring_order(
    a: BondOrder | None, b: BondOrder | None, pos: int
) -> BondOrder | None:
    if a is not None and b is not None and a != b:
        raise UnknownSymbolError("conflicting ring-closure bond orders", pos)
    return a if a is not None else b


def _assemble(
    pending: list[_PendingAtom],
    raw_bonds: list[tuple[int, int, BondOrder | None, int]],
) -> Molecule:
    # default bond: aromatic between two aromatic atoms, else single
    bonds = []
    for a1, a2, order, _pos in raw_bonds:
        if order is None:
            if pending[a1].aromatic and pending[a2].aromatic:
                order = BondOrder.AROMATIC
            else:
                order = BondOrder.SINGLE
        bonds.append(Bond(a1, a2, order))

    orders_at: list[list[BondOrder]] = [[] for _ in pending]
    for b in bonds:
        orders_at[b.a1].append(b.order)
        orders_at[b.a2].append(b.order)

    atoms = []
    for i, pa in enumerate(pending):
        valence = bonded_valence(pa.element, orders_at[i])
        if pa.hcount is not None:
            h = pa.hcount
        else:
            h = implicit_hydrogens(pa.element, pa.charge, valence)
            if h is None:
                raise ValenceError(
                    f"valence of {pa.element} exceeded ({valence})", pa.pos)
        atoms.append(Atom(pa.element, i, pa.charge, h, pa.aromatic, pa.atom_map))

    mol = Molecule(tuple(atoms), tuple(bonds))
    return perceive_aromaticity(mol)


# ---------------------------------------------------------------------------
# aromaticity perception

_AROMATIC_ELIGIBLE = {"C", "N", "O", "S", "B", "P"}


def perceive_aromaticity(mol: Molecule) -> Molecule:
    """Normalize Kekule 5/6-rings to aromatic form.

    Deliberately weaker than full Hueckel perception: a 6-ring qualifies
    when its bonds alternate single/double; a 5-ring when it has exactly
    two non-adjacent double bonds and the remaining atom is a N/O/S
    lone-pair donor. Applied repeatedly so fused systems settle.
    """
    rings = _small_rings(mol)
    if not rings:
        return mol
    aromatic_atoms = {a.index for a in mol.atoms if a.aromatic}
    aromatic_bonds = {b.key for b in mol.bonds if b.order is BondOrder.AROMATIC}

    changed = True
    while changed:
        changed = False
        for ring in rings:
            if all(mol.atoms[i].element in _AROMATIC_ELIGIBLE for i in ring) and \
                    _ring_is_aromatic(mol, ring, aromatic_bonds):
                ring_keys = set(_ring_bond_keys(ring))
                if not ring_keys <= aromatic_bonds:
                    aromatic_bonds |= ring_keys
                    aromatic_atoms |= set(ring)
                    changed = True

    if not aromatic_atoms and not aromatic_bonds:
        return mol
    atoms = tuple(
        a.with_(aromatic=True) if a.index in aromatic_atoms else a
        for a in mol.atoms
    )
    bonds = tuple(
        Bond(b.a1, b.a2, BondOrder.AROMATIC) if b.key in aromatic_bonds else b
        for b in mol.bonds
    )
    return Molecule(atoms, bonds)


def _ring_bond_keys(ring: list[int]) -> list[tuple[int, int]]:
    return [
        (min(ring[i], ring[(i + 1) % len(ring)]), max(ring[i], ring[(i + 1) % len(ring)]))
        for i in range(len(ring))
    ]


def _ring_is_aromatic(
    mol: Molecule, ring: list[int], already: set[tuple[int, int]]
) -> bool:
    orders = []
    for i in range(len(ring)):
        b = mol.bond_between(ring[i], ring[(i + 1) % len(ring)])
        if b is None:
            return False
        if b.key in already or b.order is BondOrder.AROMATIC:
            orders.append("a")
        elif b.order is BondOrder.SINGLE:
            orders.append("s")
        elif b.order is BondOrder.DOUBLE:
            orders.append("d")
        else:
            return False
    if all(o == "a" for o in orders):
        return True
    if len(ring) == 6:
        # single/double alternation in either phase; 'a' matches both
        for phase in (0, 1):
            if all(o == "a" or o == ("d" if k % 2 == phase else "s")
                   for k, o in enumerate(orders)):
                return True
        return False
    if len(ring) == 5:
        # pivot heteroatom donates the lone pair: s d s d s around from it,
        # with already-aromatic bonds (fused systems) matching either slot
        for k in range(5):
            if mol.atoms[ring[k]].element not in ("N", "O", "S"):
                continue
            seq = [orders[(k + i) % 5] for i in range(5)]
            if all(seq[i] in ("s", "a") for i in (0, 2, 4)) and \
                    all(seq[i] in ("d", "a") for i in (1, 3)):
                return True
        return False
    return False


def _small_rings(mol: Molecule, max_size: int = 6) -> list[list[int]]:
    """All simple cycles of length <= max_size, deduplicated."""
    rings: list[list[int]] = []
    seen: set[frozenset[int]] = set()
    n = mol.num_atoms

    def dfs(start: int, current: int, path: list[int]):
        for nbr, _ in mol.neighbors(current):
            if nbr == start and len(path) >= 3:
                key = frozenset(path)
                if key not in seen and len(key) == len(path):
                    seen.add(key)
                    rings.append(list(path))
            elif nbr > start and nbr not in path and len(path) < max_size:
                path.append(nbr)
                dfs(start, nbr, path)
                path.pop()

    for s in range(n):
        dfs(s, s, [s])
    return rings

"""SMARTS-subset pattern parsing.

Query features covered: element symbols with aromatic/aliphatic case,
wildcard *, charge, H-count, degree (D), atom maps, bond order queries
(- = # : ~ and the unspecified single-or-aromatic default), bracketed
conjunctions joined with ';', branches, ring closures, dot-separated
components. Anything else raises UnsupportedQueryFeatureError naming the
offending token.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from .mol import AROMATIC_SYMBOLS, ELEMENTS


class SmartsError(ValueError):
    pass


class MalformedPatternError(SmartsError):
    pass


class UnsupportedQueryFeatureError(SmartsError):
    def __init__(self, token: str):
        super().__init__(f"unsupported SMARTS feature: {token!r}")
        self.token = token


class BondQueryKind(enum.Enum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4
    ANY = 5
    DEFAULT = 6  # unspecified: single or aromatic


@dataclass(frozen=True)
class AtomQuery:
    """Constraint conjunction for one pattern atom; None = unconstrained."""

    element: str | None = None
    aromatic: bool | None = None
    charge: int | None = None
    hydrogens: int | None = None
    degree: int | None = None
    atom_map: int | None = None

    def with_map(self, atom_map: int | None) -> "AtomQuery":
        return AtomQuery(self.element, self.aromatic, self.charge,
                         self.hydrogens, self.degree, atom_map)


@dataclass(frozen=True)
class PatternBond:
    a1: int
    a2: int
    kind: BondQueryKind

    @property
    def key(self) -> tuple[int, int]:
        return (self.a1, self.a2) if self.a1 < self.a2 else (self.a2, self.a1)


@dataclass(frozen=True)
class PatternGraph:
    atoms: tuple[AtomQuery, ...]
    bonds: tuple[PatternBond, ...]
    source: str = ""
    _adjacency: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for bi, b in enumerate(self.bonds):
            adj[b.a1].append((b.a2, bi))
            adj[b.a2].append((b.a1, bi))
        object.__setattr__(self, "_adjacency", tuple(tuple(x) for x in adj))

    def neighbors(self, idx: int) -> tuple[tuple[int, int], ...]:
        return self._adjacency[idx]

    def bond_between(self, a: int, b: int) -> PatternBond | None:
        for nbr, bi in self._adjacency[a]:
            if nbr == b:
                return self.bonds[bi]
        return None

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def atom_maps(self) -> dict[int, int]:
        """atom_map -> atom index for mapped query atoms."""
        return {q.atom_map: i for i, q in enumerate(self.atoms)
                if q.atom_map is not None}


_BOND_QUERY = {
    "-": BondQueryKind.SINGLE,
    "=": BondQueryKind.DOUBLE,
    "#": BondQueryKind.TRIPLE,
    ":": BondQueryKind.AROMATIC,
    "~": BondQueryKind.ANY,
}

_BOND_TOKEN = {
    BondQueryKind.SINGLE: "-",
    BondQueryKind.DOUBLE: "=",
    BondQueryKind.TRIPLE: "#",
    BondQueryKind.AROMATIC: ":",
    BondQueryKind.ANY: "~",
    BondQueryKind.DEFAULT: "",
}


def query_token(q: AtomQuery, atom_map: int | None) -> str:
    """Canonical written form of one atom query."""
    if q.element is None:
        sym = "*"
    elif q.aromatic:
        sym = q.element.lower()
    else:
        sym = q.element
    plain = (q.charge is None and q.hydrogens is None and q.degree is None
             and atom_map is None)
    if plain and (q.element is None or
                  (not q.aromatic and q.element in {"B", "C", "N", "O", "P",
                                                    "S", "F", "Cl", "Br", "I"})
                  or (q.aromatic and sym in {"b", "c", "n", "o", "p", "s"})):
        return sym
    body = sym
    if q.hydrogens is not None:
        body += "H" if q.hydrogens == 1 else f"H{q.hydrogens}"
    if q.degree is not None:
        body += f"D{q.degree}"
    if q.charge is not None and q.charge != 0:
        sign = "+" if q.charge > 0 else "-"
        body += sign if abs(q.charge) == 1 else f"{sign}{abs(q.charge)}"
    elif q.charge == 0:
        body += "+0"
    if atom_map is not None:
        body += f":{atom_map}"
    return f"[{body}]"


def pattern_canonical_forms(
    pattern: PatternGraph,
    map_values: dict[int, int | None],
    maps_in_invariant: bool,
) -> tuple[str, list[tuple]]:
    """Canonical emission of a pattern graph.

    ``map_values`` gives the atom map to print per atom index (None for
    unmapped). When ``maps_in_invariant`` the printed maps also
    participate in atom ordering, pinning mapped atoms in place; when not,
    symmetric mapped atoms stay interchangeable and every optimal
    (ranks, visit order) payload is returned for the caller to resolve.
    """
    from .canon import canonical_forms, write_graph

    n = pattern.num_atoms
    adj_codes = [
        [(v, pattern.bonds[e].kind.value) for v, e in pattern.neighbors(i)]
        for i in range(n)
    ]
    adj_edges = [list(pattern.neighbors(i)) for i in range(n)]
    init = []
    for i, q in enumerate(pattern.atoms):
        inv = (
            q.element or "", -1 if q.aromatic is None else int(q.aromatic),
            99 if q.charge is None else q.charge,
            -1 if q.hydrogens is None else q.hydrogens,
            -1 if q.degree is None else q.degree,
        )
        if maps_in_invariant:
            inv = inv + (map_values.get(i) or 0,)
        init.append(inv)

    def emit(ranks):
        s, order = write_graph(
            n, adj_edges, ranks,
            atom_token=lambda u: query_token(pattern.atoms[u], map_values.get(u)),
            bond_token=lambda e: _BOND_TOKEN[pattern.bonds[e].kind],
        )
        return s, (tuple(ranks), order)

    return canonical_forms(n, adj_codes, init, emit)

_PRIMITIVE_RE = re.compile(
    r"^(?P<symbol>\*|[A-Z][a-z]?|as|se|[bcnops])?"
    r"(?P<hcount>H\d*)?"
    r"(?P<degree>D\d*)?"
    r"(?P<charge>\+\d+|-\d+|\++|-+)?$"
)


def parse_smarts(text: str) -> PatternGraph:
    """Parse a SMARTS pattern over the supported query subset."""
    if not text:
        raise MalformedPatternError("empty pattern")

    atoms: list[AtomQuery] = []
    bonds: list[tuple[int, int, BondQueryKind]] = []
    open_rings: dict[int, tuple[int, BondQueryKind | None]] = {}
    branch_stack: list[int | None] = []
    prev: int | None = None
    pending: BondQueryKind | None = None

    def add_atom(q: AtomQuery):
        nonlocal prev, pending
        idx = len(atoms)
        atoms.append(q)
        if prev is not None:
            bonds.append((prev, idx, pending or BondQueryKind.DEFAULT))
        elif pending is not None:
            raise MalformedPatternError("bond query with no preceding atom")
        prev = idx
        pending = None

    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "(":
            if prev is None:
                raise MalformedPatternError("branch before any atom")
            branch_stack.append(prev)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise MalformedPatternError("unmatched ')'")
            prev = branch_stack.pop()
            i += 1
        elif ch == ".":
            if pending is not None:
                raise MalformedPatternError("bond query before '.'")
            prev = None
            i += 1
        elif ch in _BOND_QUERY:
            pending = _BOND_QUERY[ch]
            i += 1
        elif ch in ("/", "\\"):
            pending = BondQueryKind.SINGLE
            i += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                    raise MalformedPatternError("'%' needs two digits")
                num, width = int(text[i + 1 : i + 3]), 3
            else:
                num, width = int(ch), 1
            if prev is None:
                raise MalformedPatternError("ring digit before any atom")
            if num in open_rings:
                other, open_kind = open_rings.pop(num)
                kind = pending if pending is not None else open_kind
                bonds.append((other, prev, kind or BondQueryKind.DEFAULT))
            else:
                open_rings[num] = (prev, pending)
            pending = None
            i += width
        elif ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise MalformedPatternError("unclosed '['")
            add_atom(_parse_bracket_query(text[i + 1 : end]))
            i = end + 1
        elif ch == "$":
            raise UnsupportedQueryFeatureError("$(...)")
        elif ch in "!,&@":
            raise UnsupportedQueryFeatureError(ch)
        elif ch == "*":
            add_atom(AtomQuery())
            i += 1
        else:
            two = text[i : i + 2]
            if two in ("Cl", "Br"):
                add_atom(AtomQuery(element=two, aromatic=False))
                i += 2
            elif ch in "BCNOPSFI":
                add_atom(AtomQuery(element=ch, aromatic=False))
                i += 1
            elif ch in "bcnops":
                add_atom(AtomQuery(element=ch.upper(), aromatic=True))
                i += 1
            else:
                raise UnsupportedQueryFeatureError(ch)

    if branch_stack:
        raise MalformedPatternError("unclosed '('")
    if open_rings:
        raise MalformedPatternError(
            f"ring closure {sorted(open_rings)[0]} never closed")
    if pending is not None:
        raise MalformedPatternError("dangling bond query")
    if not atoms:
        raise MalformedPatternError("pattern has no atoms")

    seen_maps: set[int] = set()
    for q in atoms:
        if q.atom_map is not None:
            if q.atom_map in seen_maps:
                raise MalformedPatternError(f"duplicate atom map {q.atom_map}")
            seen_maps.add(q.atom_map)

    pattern_bonds = tuple(PatternBond(a1, a2, kind) for a1, a2, kind in bonds)
    return PatternGraph(tuple(atoms), pattern_bonds, source=text)


def _parse_bracket_query(body: str) -> AtomQuery:
    atom_map: int | None = None
    if ":" in body:
        body, _, map_part = body.rpartition(":")
        if not map_part.isdigit() or int(map_part) <= 0:
            raise MalformedPatternError(f"bad atom map {map_part!r}")
        atom_map = int(map_part)
    if not body:
        raise MalformedPatternError("empty bracket query")

    element: str | None = None
    aromatic: bool | None = None
    charge: int | None = None
    hydrogens: int | None = None
    degree: int | None = None

    for part in body.split(";"):
        if not part:
            raise MalformedPatternError("empty ';' conjunct")
        if part.startswith("$("):
            raise UnsupportedQueryFeatureError("$(...)")
        for bad in "!,&@":
            if bad in part:
                raise UnsupportedQueryFeatureError(bad)
        m = _PRIMITIVE_RE.match(part)
        if m is None or not m.group(0):
            raise UnsupportedQueryFeatureError(part)
        sym = m.group("symbol")
        if sym is not None and sym != "*" and sym != "H":
            low = sym[0].islower()
            el = sym.capitalize() if low else sym
            if low and sym not in AROMATIC_SYMBOLS:
                raise UnsupportedQueryFeatureError(sym)
            if el not in ELEMENTS:
                raise UnsupportedQueryFeatureError(sym)
            element, aromatic = el, low
        elif sym == "H" and not m.group("hcount"):
            # bare H primitive: hydrogen count of one (Daylight shorthand)
            hydrogens = 1
        h = m.group("hcount")
        if h is not None:
            hydrogens = 1 if h == "H" else int(h[1:])
        d = m.group("degree")
        if d is not None:
            degree = 1 if d == "D" else int(d[1:])
        c = m.group("charge")
        if c is not None:
            if c[0] == "+":
                charge = int(c[1:]) if c[1:].isdigit() else len(c)
            else:
                charge = -int(c[1:]) if c[1:].isdigit() else -len(c)

    return AtomQuery(element, aromatic, charge, hydrogens, degree, atom_map)

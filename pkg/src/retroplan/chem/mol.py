"""Molecular graph types: atoms, bonds, and immutable molecules.

Molecules are plain attributed graphs. Hydrogen counts are stored
explicitly on every atom (assigned from the standard valence table at
parse time), so pattern queries like [OH] can be answered without
re-deriving valence state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class BondOrder(enum.Enum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        """Contribution to the bonded valence of each endpoint."""
        if self is BondOrder.AROMATIC:
            return 1.5
        return float(self.value)

    @property
    def symbol(self) -> str:
        return {"SINGLE": "-", "DOUBLE": "=", "TRIPLE": "#", "AROMATIC": ":"}[self.name]


# Elements that may be written bare (no brackets) in SMILES.
ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
AROMATIC_SYMBOLS = {"b", "c", "n", "o", "p", "s", "se", "as"}

# Allowed bonded-valence states for implicit-hydrogen assignment.
DEFAULT_VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ELEMENTS = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe",
    "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr",
    "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Sm", "Eu",
    "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
}

# Standard atomic weights (g/mol), conventional values.
ATOMIC_WEIGHTS: dict[str, float] = {
    "H": 1.008, "He": 4.003, "Li": 6.94, "Be": 9.012, "B": 10.81,
    "C": 12.011, "N": 14.007, "O": 15.999, "F": 18.998, "Ne": 20.180,
    "Na": 22.990, "Mg": 24.305, "Al": 26.982, "Si": 28.085, "P": 30.974,
    "S": 32.06, "Cl": 35.45, "Ar": 39.95, "K": 39.098, "Ca": 40.078,
    "Sc": 44.956, "Ti": 47.867, "V": 50.942, "Cr": 51.996, "Mn": 54.938,
    "Fe": 55.845, "Co": 58.933, "Ni": 58.693, "Cu": 63.546, "Zn": 65.38,
    "Ga": 69.723, "Ge": 72.630, "As": 74.922, "Se": 78.971, "Br": 79.904,
    "Kr": 83.798, "Rb": 85.468, "Sr": 87.62, "Zr": 91.224, "Mo": 95.95,
    "Ru": 101.07, "Rh": 102.906, "Pd": 106.42, "Ag": 107.868, "Cd": 112.414,
    "In": 114.818, "Sn": 118.710, "Sb": 121.760, "Te": 127.60, "I": 126.904,
    "Xe": 131.293, "Cs": 132.905, "Ba": 137.327, "W": 183.84, "Pt": 195.084,
    "Au": 196.967, "Hg": 200.592, "Tl": 204.38, "Pb": 207.2, "Bi": 208.980,
}


def bonded_valence(element: str, orders) -> float:
    """Sum of bond-order valences at one atom.

    An aromatic atom takes part in at most one Kekule double bond, so k
    aromatic bonds contribute k+1 -- except lone-pair donors (O, S) where
    they contribute k: furan's oxygen has Kekule valence 2, naphthalene's
    fusion carbon 4.
    """
    total = 0.0
    aromatic = 0
    for o in orders:
        if o is BondOrder.AROMATIC:
            aromatic += 1
        else:
            total += o.valence
    if aromatic:
        total += aromatic if element in ("O", "S") else aromatic + 1
    return total


def implicit_hydrogens(element: str, charge: int, bond_valence: float) -> int | None:
    """Hydrogens to add so the atom reaches its nearest standard valence.

    ``bond_valence`` counts aromatic bonds as 1.5. Returns None when the
    bonded valence already exceeds every allowed state (a valence
    violation for organic-subset atoms, "no implicit H" for the rest).
    """
    valences = DEFAULT_VALENCES.get(element)
    if valences is None:
        return 0
    need = -(-int(bond_valence * 2) // 2)  # ceil to next integer
    for v in valences:
        v_eff = _charge_adjusted(element, v, charge)
        if v_eff >= need:
            return v_eff - need
    return None


def _charge_adjusted(element: str, valence: int, charge: int) -> int:
    if charge == 0:
        return valence
    if element in ("N", "P"):
        return valence + charge
    if element in ("O", "S"):
        return valence + charge
    if element == "C":
        return valence - abs(charge)
    if element == "B":
        return valence + abs(charge)
    return max(valence - abs(charge), 0)


@dataclass(frozen=True)
class Atom:
    """One heavy atom. ``explicit_h`` is the total attached H count."""

    element: str
    index: int
    charge: int = 0
    explicit_h: int = 0
    aromatic: bool = False
    atom_map: int | None = None

    def with_(self, **changes) -> "Atom":
        fields = dict(
            element=self.element, index=self.index, charge=self.charge,
            explicit_h=self.explicit_h, aromatic=self.aromatic,
            atom_map=self.atom_map,
        )
        fields.update(changes)
        return Atom(**fields)


@dataclass(frozen=True)
class Bond:
    a1: int
    a2: int
    order: BondOrder

    def other(self, idx: int) -> int:
        return self.a2 if idx == self.a1 else self.a1

    @property
    def key(self) -> tuple[int, int]:
        return (self.a1, self.a2) if self.a1 < self.a2 else (self.a2, self.a1)


class MoleculeError(ValueError):
    pass


@dataclass(frozen=True)
class Molecule:
    """Immutable molecular graph, hashable by canonical SMILES."""

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    _adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(
        init=False, repr=False, compare=False)
    _canonical: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen: set[tuple[int, int]] = set()
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for bi, b in enumerate(self.bonds):
            if b.a1 == b.a2:
                raise MoleculeError(f"self-bond on atom {b.a1}")
            if b.key in seen:
                raise MoleculeError(f"duplicate bond {b.key}")
            seen.add(b.key)
            adj[b.a1].append((b.a2, bi))
            adj[b.a2].append((b.a1, bi))
        object.__setattr__(self, "_adjacency", tuple(tuple(x) for x in adj))
        object.__setattr__(self, "_canonical", [])

    def neighbors(self, idx: int) -> tuple[tuple[int, int], ...]:
        """(neighbor index, bond index) pairs for one atom."""
        return self._adjacency[idx]

    def bond_between(self, a: int, b: int) -> Bond | None:
        for nbr, bi in self._adjacency[a]:
            if nbr == b:
                return self.bonds[bi]
        return None

    def degree(self, idx: int) -> int:
        return len(self._adjacency[idx])

    def bond_valence(self, idx: int) -> float:
        return bonded_valence(
            self.atoms[idx].element,
            (self.bonds[bi].order for _, bi in self._adjacency[idx]),
        )

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def components(self) -> list[list[int]]:
        """Connected components as sorted atom-index lists."""
        seen: set[int] = set()
        out: list[list[int]] = []
        for start in range(len(self.atoms)):
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                i = stack.pop()
                comp.append(i)
                for j, _ in self._adjacency[i]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
            out.append(sorted(comp))
        return out

    def canonical(self) -> str:
        """Canonical SMILES (atom maps excluded), cached."""
        if not self._canonical:
            from .canon import canonical_smiles
            self._canonical.append(canonical_smiles(self))
        return self._canonical[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Molecule):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())


def split_components(mol: Molecule) -> list[Molecule]:
    """One Molecule per connected component, in component order."""
    comps = mol.components()
    if len(comps) == 1:
        return [mol]
    out = []
    for comp in comps:
        remap = {old: new for new, old in enumerate(comp)}
        atoms = tuple(mol.atoms[i].with_(index=remap[i]) for i in comp)
        bonds = tuple(
            Bond(remap[b.a1], remap[b.a2], b.order)
            for b in mol.bonds if b.a1 in remap and b.a2 in remap
        )
        out.append(Molecule(atoms, bonds))
    return out


def molecular_weight(mol: Molecule) -> float:
    """Sum of standard atomic weights, implicit hydrogens included."""
    total = 0.0
    for atom in mol.atoms:
        try:
            total += ATOMIC_WEIGHTS[atom.element]
        except KeyError:
            raise MoleculeError(f"no atomic weight for element {atom.element!r}")
        total += atom.explicit_h * ATOMIC_WEIGHTS["H"]
    return total

"""Molecular graphs, SMILES/SMARTS parsing, canonicalization, matching."""

from .mol import (
    ATOMIC_WEIGHTS,
    Atom,
    Bond,
    BondOrder,
    Molecule,
    MoleculeError,
    molecular_weight,
    split_components,
)
from .parse import (
    SmilesError,
    UnbalancedParenthesesError,
    UnclosedRingError,
    UnknownSymbolError,
    ValenceError,
    parse_smiles,
)
from .canon import canonical_smiles, to_smiles
from .fingerprint import morgan_fingerprint
from .smarts import (
    AtomQuery,
    BondQueryKind,
    PatternBond,
    PatternGraph,
    SmartsError,
    UnsupportedQueryFeatureError,
    parse_smarts,
)
from .match import find_matches

__all__ = [
    "ATOMIC_WEIGHTS", "Atom", "Bond", "BondOrder", "Molecule", "MoleculeError",
    "molecular_weight", "split_components", "SmilesError",
    "UnbalancedParenthesesError", "UnclosedRingError", "UnknownSymbolError",
    "ValenceError", "parse_smiles", "canonical_smiles", "to_smiles",
    "morgan_fingerprint", "AtomQuery", "BondQueryKind", "PatternBond",
    "PatternGraph", "SmartsError", "UnsupportedQueryFeatureError",
    "parse_smarts", "find_matches",
]

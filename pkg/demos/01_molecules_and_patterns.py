"""Parsing molecules, canonical forms, fingerprints, pattern matching.

Run from the repository root after installing the package:

    python demos/01_molecules_and_patterns.py
"""

import numpy as np

from retroplan.chem import (
    canonical_smiles,
    find_matches,
    molecular_weight,
    morgan_fingerprint,
    parse_smarts,
    parse_smiles,
)

print("== parsing and canonicalization ==")
for spelling in ("CCO", "OCC", "C(O)C"):
    mol = parse_smiles(spelling)
    print(f"{spelling:8s} -> canonical {canonical_smiles(mol)}")

print("\nKekule and aromatic spellings agree:")
for spelling in ("c1ccccc1", "C1=CC=CC=C1"):
    print(f"{spelling:12s} -> {canonical_smiles(parse_smiles(spelling))}")

print("\n== molecular weights ==")
for s in ("C", "c1ccccc1", "CC(=O)Nc1ccccc1"):
    print(f"{s:18s} {molecular_weight(parse_smiles(s)):7.2f} g/mol")

print("\n== fingerprints ==")
fp_a = morgan_fingerprint(parse_smiles("CCO"))
fp_b = morgan_fingerprint(parse_smiles("OCC"))
fp_c = morgan_fingerprint(parse_smiles("CCN"))
print("bits set for ethanol:", int(fp_a.sum()))
print("ethanol spellings identical:", np.array_equal(fp_a, fp_b))
print("ethanol vs ethylamine differ:", not np.array_equal(fp_a, fp_c))

print("\n== substructure matching ==")
diol = parse_smiles("OCCCCO")
pattern = parse_smarts("[C][OH]")
print("hydroxyl sites in pentane-1,5-diol:", find_matches(pattern, diol))
amide = parse_smarts("[C:1](=[O:2])[N:3]")
print("amide site in N-methylacetamide:",
      find_matches(amide, parse_smiles("CC(=O)NC")))

"""Curated atom-mapped fixture reactions and synthetic planning chains.

Reactions are assembled from SMILES fragments whose concatenation keeps
atom order predictable, so atom maps can be assigned by index arithmetic:
for ``R1 + core + R2`` strings, fragment atoms parse in writing order.
Every family records (reactant molecules, product molecule) with maps
consistent across sides and the byproduct atoms left unmapped.
"""

from __future__ import annotations

from dataclasses import dataclass

from retroplan.chem.canon import to_smiles
from retroplan.chem.mol import Molecule
from retroplan.chem.parse import parse_smiles


def with_maps(mol: Molecule, mapping: dict[int, int]) -> Molecule:
    atoms = tuple(
        a.with_(atom_map=mapping.get(i)) for i, a in enumerate(mol.atoms))
    return Molecule(atoms, mol.bonds)


@dataclass
class FixtureReaction:
    name: str
    reactants: list[Molecule]
    product: Molecule

    def rxn_smiles(self) -> str:
        left = ".".join(to_smiles(m, keep_maps=True) for m in self.reactants)
        return f"{left}>>{to_smiles(self.product, keep_maps=True)}"

    def reactant_key(self) -> tuple[str, ...]:
        return tuple(sorted(m.canonical() for m in self.reactants))


def _n_atoms(fragment: str) -> int:
    return parse_smiles(fragment).num_atoms if fragment else 0


def amide_coupling(r1: str, r2: str) -> FixtureReaction:
    """R1-COOH + H2N-R2 -> R1-C(=O)NH-R2 (hydroxyl leaves unmapped)."""
    k = _n_atoms(r1)
    acid = parse_smiles(f"{r1}C(=O)O")
    amine = parse_smiles(f"N{r2}")
    product = parse_smiles(f"{r1}C(=O)N{r2}")
    acid_maps = {i: i + 1 for i in range(k + 2)}          # R1, C, =O
    amine_maps = {j: k + 3 + j for j in range(amine.num_atoms)}
    product_maps = {i: i + 1 for i in range(product.num_atoms)}
    return FixtureReaction(
        "amide", [with_maps(acid, acid_maps), with_maps(amine, amine_maps)],
        with_maps(product, product_maps))


def ester_formation(r1: str, r2: str) -> FixtureReaction:
    """R1-COOH + HO-R2 -> R1-C(=O)O-R2."""
    k = _n_atoms(r1)
    acid = parse_smiles(f"{r1}C(=O)O")
    alcohol = parse_smiles(f"O{r2}")
    product = parse_smiles(f"{r1}C(=O)O{r2}")
    acid_maps = {i: i + 1 for i in range(k + 2)}
    alcohol_maps = {j: k + 3 + j for j in range(alcohol.num_atoms)}
    product_maps = {i: i + 1 for i in range(product.num_atoms)}
    return FixtureReaction(
        "ester", [with_maps(acid, acid_maps), with_maps(alcohol, alcohol_maps)],
        with_maps(product, product_maps))


def _substitution(name: str, r1: str, partner_head: str, r2: str) -> FixtureReaction:
    """R1-Br + H(X)-R2 -> R1-X-R2 for X in {O, N, S}; bromide unmapped."""
    k = _n_atoms(r1)
    bromide = parse_smiles(f"{r1}Br")
    partner = parse_smiles(f"{partner_head}{r2}")
    product = parse_smiles(f"{r1}{partner_head}{r2}")
    bromide_maps = {i: i + 1 for i in range(k)}           # Br stays unmapped
    partner_maps = {j: k + 1 + j for j in range(partner.num_atoms)}
    product_maps = {i: i + 1 for i in range(product.num_atoms)}
    return FixtureReaction(
        name,
        [with_maps(bromide, bromide_maps), with_maps(partner, partner_maps)],
        with_maps(product, product_maps))


def ether_coupling(r1: str, r2: str) -> FixtureReaction:
    return _substitution("ether", r1, "O", r2)


def n_alkylation(r1: str, r2: str) -> FixtureReaction:
    return _substitution("alkylation", r1, "N", r2)


def sulfide_coupling(r1: str, r2: str) -> FixtureReaction:
    return _substitution("sulfide", r1, "S", r2)


def ketone_reduction(r1: str, r2: str) -> FixtureReaction:
    """R1-C(=O)-R2 -> R1-CH(OH)-R2; single-reactant reaction."""
    ketone = parse_smiles(f"{r1}C(=O){r2}")
    alcohol = parse_smiles(f"{r1}C(O){r2}")
    maps = {i: i + 1 for i in range(ketone.num_atoms)}
    return FixtureReaction(
        "reduction", [with_maps(ketone, maps)], with_maps(alcohol, maps))


# prefix fragments attach through their last atom, suffix through the first
PREFIX_R = ["C", "CC", "CCC", "CCCC", "CC(C)", "c1ccccc1", "C1CCCCC1",
            "c1ccncc1", "CCOCC", "c1ccc2ccccc2c1"]
SUFFIX_R = ["C", "CC", "CCC", "C(C)C", "c1ccccc1", "Cc1ccccc1",
            "C1CCCCC1", "c1ccsc1", "CCOC", "CCc1ccccc1"]


def fixture_corpus(min_size: int = 50) -> list[FixtureReaction]:
    """Deterministic corpus covering all six families."""
    families = [amide_coupling, ester_formation, ether_coupling,
                n_alkylation, sulfide_coupling, ketone_reduction]
    out: list[FixtureReaction] = []
    i = 0
    while len(out) < min_size or i < len(PREFIX_R):
        r1 = PREFIX_R[i % len(PREFIX_R)]
        r2 = SUFFIX_R[(i + i // len(PREFIX_R)) % len(SUFFIX_R)]
        for family in families:
            out.append(family(r1, r2))
        i += 1
    return out


# ---------------------------------------------------------------------------
# synthetic multi-step planning chains

@dataclass
class PlanningChain:
    """A target with its unique recorded route and supporting stock."""

    target: Molecule
    reactions: list[FixtureReaction]   # ordered target-first
    stock_smiles: list[str]

    def table_records(self) -> list[tuple[str, str]]:
        from retroplan.templates import extract_template

        records = []
        for rxn in self.reactions:
            template = extract_template(rxn.reactants, rxn.product, radius=1)
            records.append((rxn.product.canonical(), template.source_smarts))
        return records


def two_step_chain(acid_r: str, ra: str) -> PlanningChain:
    """T = amide(acid, Ra-NH2); Ra-NH2 = alkylation(Ra-Br, ammonia)."""
    step2 = n_alkylation(ra, "")          # RaBr + N -> RaN
    step1 = amide_coupling(acid_r, _as_suffix_amine(step2.product))
    return PlanningChain(
        target=step1.product,
        reactions=[step1, step2],
        stock_smiles=[f"{acid_r}C(=O)O", f"{ra}Br", "N"],
    )


def _as_suffix_amine(amine_product: Molecule) -> str:
    """Rewrite Ra-N as the N-suffix fragment used inside larger strings.

    Only valid for fragments whose prefix and suffix spellings denote the
    same molecule (linear chains), which the chain builders stick to.
    """
    s = amine_product.canonical()
    if s.startswith("N"):
        return s[1:]
    if s.endswith("N"):
        return s[:-1][::-1]
    raise ValueError(f"cannot reuse {s} as suffix amine")


def three_step_chain(acid_r: str, ra: str, rb: str) -> PlanningChain:
    """T = amide(acid, Ra-NH-Rb); the secondary amine comes from
    alkylation(Ra-Br, Rb-NH2) and Rb-NH2 from alkylation(Rb-Br, ammonia)."""
    step3 = n_alkylation(rb, "")                    # RbBr + N -> RbN
    step2 = n_alkylation(ra, _as_suffix_amine(step3.product))
    secondary = step2.product                       # Ra-NH-Rb

    acid = parse_smiles(f"{acid_r}C(=O)O")
    product = parse_smiles(
        f"{acid_r}C(=O)N({_as_suffix_amine(step3.product)}){_prefix_tail(ra)}")
    ka = _n_atoms(acid_r)
    acid_maps = {i: i + 1 for i in range(ka + 2)}
    amine_maps = _amine_maps_for_branch(secondary, product, ka)
    product_maps = {i: i + 1 for i in range(product.num_atoms)}
    step1 = FixtureReaction(
        "amide", [with_maps(acid, acid_maps),
                  with_maps(_strip_maps(secondary), amine_maps)],
        with_maps(product, product_maps))
    return PlanningChain(
        target=step1.product,
        reactions=[step1, step2, step3],
        stock_smiles=[f"{acid_r}C(=O)O", f"{ra}Br", f"{rb}Br", "N"],
    )


def _prefix_tail(ra: str) -> str:
    # linear alkyl prefixes read the same reversed
    return ra


def _strip_maps(mol: Molecule) -> Molecule:
    return with_maps(mol, {})


def _amine_maps_for_branch(secondary: Molecule, product: Molecule,
                           ka: int) -> dict[int, int]:
    """Map the secondary amine onto the amide product written as
    ``acid + C(=O)N(rb)(ra)``: product atom order after the carbonyl is
    N, Rb atoms, Ra atoms, while the amine parses as Ra..N..Rb."""
    n_atoms = secondary.num_atoms
    n_idx = next(i for i, a in enumerate(secondary.atoms) if a.element == "N")
    ra_len = n_idx                       # amine string was ra + 'N' + rb
    rb_len = n_atoms - n_idx - 1
    maps: dict[int, int] = {}
    base = ka + 2                        # product maps: acid block first
    maps[n_idx] = base + 1               # N right after the carbonyl
    for j in range(rb_len):              # Rb block follows N in the product
        maps[n_idx + 1 + j] = base + 2 + j
    for j in range(ra_len):              # Ra block written last, reversed
        maps[ra_len - 1 - j] = base + 2 + rb_len + j
    return maps


LINEAR_ALKYLS = ["CC", "CCC", "CCCC", "CCCCC", "CCCCCC"]


def planning_benchmark(n_two: int = 10, n_three: int = 10) -> list[PlanningChain]:
    chains: list[PlanningChain] = []
    acids = PREFIX_R
    for i in range(n_two):
        alkyl = LINEAR_ALKYLS[(i + i // len(acids)) % len(LINEAR_ALKYLS)]
        chains.append(two_step_chain(acids[i % len(acids)], alkyl))
    for i in range(n_three):
        ra = LINEAR_ALKYLS[(i + i // len(acids)) % len(LINEAR_ALKYLS)]
        rb = LINEAR_ALKYLS[(i + 2 + i // len(acids)) % len(LINEAR_ALKYLS)]
        if ra == rb:
            rb = LINEAR_ALKYLS[(i + 3) % len(LINEAR_ALKYLS)]
        chains.append(three_step_chain(acids[(i + 3) % len(acids)], ra, rb))
    return chains

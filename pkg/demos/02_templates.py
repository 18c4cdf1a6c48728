"""Retro templates: extraction from mapped reactions, application by
graph rewriting, canonical hashing, library membership."""

from retroplan.chem import parse_smiles
from retroplan.templates import (
    TemplateLibrary,
    apply_template,
    canonical_template_smarts,
    extract_template,
    parse_retro_template,
    template_hash,
)

print("== applying a hand-written retro template ==")
amide_retro = parse_retro_template(
    "[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH].[N:3]")
product = parse_smiles("CCC(=O)NCc1ccccc1")
for reactant_set in apply_template(amide_retro, product):
    print("disconnection ->", " + ".join(reactant_set.key))

print("\n== extracting a template from a mapped reaction ==")
reactants = [parse_smiles("[CH3:1][C:2](=[O:3])O"),
             parse_smiles("[CH3:5][NH2:4]")]
mapped_product = parse_smiles("[CH3:1][C:2](=[O:3])[NH:4][CH3:5]")
extracted = extract_template(reactants, mapped_product, radius=1)
print("radius-1 template:", extracted.source_smarts)

print("\nround trip: applying the extracted template to the product")
for reactant_set in apply_template(extracted, mapped_product):
    print("recovered ->", " + ".join(reactant_set.key))

print("\n== canonical form and hashing ==")
respelled = parse_retro_template(
    "[C:3](=[O:1])[N:2]>>[N:2].[C:3](=[O:1])[OH]")
print("canonical:", canonical_template_smarts(respelled))
print("hashes agree despite renumbered maps and reordered reactants:",
      template_hash(respelled) == template_hash(amide_retro))

print("\n== library membership drives strict filtering ==")
library = TemplateLibrary()
library.add(amide_retro.source_smarts, count=41)
print("known template count:", library.lookup(respelled))
ester = parse_retro_template(
    "[C:1](=[O:2])[O:3][C:4]>>[C:1](=[O:2])[OH].[O:3][C:4]")
print("novel template lookup:", library.lookup(ester))

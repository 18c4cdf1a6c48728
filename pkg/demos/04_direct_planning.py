"""Direct multi-step planning: reconstruct a whole route from one
template sequence, then rank candidates solved-first."""

from retroplan.chem import parse_smiles
from retroplan.direct import (
    TemplateSequence,
    rank_direct_routes,
    reconstruct_routes,
    routes_from_graph,
)
from retroplan.stock import StockSet
from retroplan.templates import parse_retro_template

amide = parse_retro_template("[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH].[N:3]")
bromide = parse_retro_template("[C:1][OH:2]>>[C:1]Br.[OH2:2]")

target = parse_smiles("CC(=O)NCCO")
stock = StockSet.from_smiles(["CC(=O)O", "NCCBr", "O", "BrC(C)=O"])

print("== sequence where every template advances the frontier ==")
graph = reconstruct_routes(target, TemplateSequence((amide, bromide), -1.2),
                           stock)
for node in graph.nodes:
    print(f"  node {node.mols_key()}  template_index={node.template_index}"
          f"  solved={node.solved}")

print("\nroutes extracted from the set graph "
      "(the bromide template hit both hydroxyl sites):")
for route in routes_from_graph(graph, stock):
    print(f"  {route.length} steps, solved={route.solved}")

print("\n== an inapplicable template retains the frontier ==")
dry_target = parse_smiles("CC(=O)NC")  # no hydroxyl anywhere
graph2 = reconstruct_routes(dry_target,
                            TemplateSequence((bromide, amide), -2.0), stock)
print("node count:", len(graph2.nodes))
print("template indices:", [n.template_index for n in graph2.nodes])
print("(the bromide template found no site; the amide template was then"
      " tried on the retained root)")

print("\n== ranking: solved first, then shorter, then likelier ==")
candidates = []
for seq, lp in [(TemplateSequence((amide, bromide), -1.2), -1.2),
                (TemplateSequence((amide,), -0.3), -0.3)]:
    g = reconstruct_routes(target, seq, stock)
    for route in routes_from_graph(g, stock):
        candidates.append((route, lp))
for route, lp in rank_direct_routes(candidates):
    print(f"  solved={route.solved} steps={route.length} log_prob={lp}")

"""Multi-step planning with P-UCB tree search over molecule sets.

A small two-step problem: the target amide disconnects into an acid and
an amine, and the amine is made by alkylating ammonia. The table policy
holds exactly those two recorded disconnections.
"""

import json

from retroplan.chem import parse_smiles
from retroplan.metrics import route_cost
from retroplan.policy import build_table_policy
from retroplan.search import SearchConfig, extract_routes, run_search
from retroplan.stock import StockSet
from retroplan.templates import extract_template

# recorded reactions (atom-mapped), most recent step first
step1_reactants = [parse_smiles("[CH3:1][CH2:2][C:3](=[O:4])O"),
                   parse_smiles("[NH2:5][CH2:6][CH2:7][CH3:8]")]
step1_product = parse_smiles(
    "[CH3:1][CH2:2][C:3](=[O:4])[NH:5][CH2:6][CH2:7][CH3:8]")
step2_reactants = [parse_smiles("[CH2:1]([CH2:2][CH3:3])Br"),
                   parse_smiles("[NH3:4]")]
step2_product = parse_smiles("[CH2:1]([CH2:2][CH3:3])[NH2:4]")

records = []
for rs, p in ((step1_reactants, step1_product),
              (step2_reactants, step2_product)):
    template = extract_template(rs, p, radius=1)
    records.append((p.canonical(), template.source_smarts))

backend = build_table_policy(records)
stock = StockSet.from_smiles(["CCC(=O)O", "CCCBr", "N"])
target = step1_product

config = SearchConfig(max_iterations=100, time_limit_s=30)
result = run_search(target, backend, stock, config)
print("search stats:", json.dumps(result.stats(), indent=1))

routes = extract_routes(result, max_routes=5)
print(f"\n{len(routes)} route(s), cheapest first:")
for route in routes:
    print(f"  {route.length} steps, cost {route_cost(route):.2f}, "
          f"solved={route.solved}")
print("\nbest route as shared JSON:")
print(json.dumps(routes[0].to_json(), indent=1))

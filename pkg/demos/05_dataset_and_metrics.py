"""The reaction cleaning rules, patent route construction, and the
evaluation metrics (pessimistic top-k, tree edit distance, reports)."""

from retroplan.chem import parse_smiles
from retroplan.dataset import ReactionRecord, build_routes, filter_reaction
from retroplan.metrics import (
    TargetOutcome,
    route_cost,
    stratified_report,
    topk_single_step,
    tree_edit_distance,
)
from retroplan.routes import build_route


def record(reactants, products, id="r", patent=None):
    return ReactionRecord(
        id=id, reactants=tuple(parse_smiles(s) for s in reactants),
        products=tuple(parse_smiles(s) for s in products), patent_id=patent)


print("== filter pipeline ==")
good = record(["[cH:1]1[cH:2][cH:3][cH:4][cH:5][c:6]1[C:7](=[O:8])O",
               "[NH2:9][CH2:10][CH3:11]"],
              ["[cH:1]1[cH:2][cH:3][cH:4][cH:5][c:6]1[C:7](=[O:8])[NH:9]"
               "[CH2:10][CH3:11]"])
accept, _modified, report = filter_reaction(good)
print("benzamide coupling accepted:", accept)

too_small = record(["[CH3:1][C:2](=[O:3])O", "[NH2:4][CH3:5]"],
                   ["[CH3:1][C:2](=[O:3])[NH:4][CH3:5]"])
accept, _modified, report = filter_reaction(too_small)
print("tiny reaction rejected by:", report.failed_rules())

print("\n== patent route construction ==")
records = [
    record(["CCCO"], ["CCC(=O)NC"], id="a", patent="P1"),
    record(["CCBr"], ["CCCO"], id="b", patent="P1"),
    record(["CCO"], ["CC(=O)O"], id="c", patent="P2"),  # single step: dropped
]
routes = build_routes(records)
print(f"{len(routes)} route(s); lengths:", [r.length for r in routes])

print("\n== route cost and tree edit distance ==")
stocked = lambda s: True
one_step = build_route("T", [("T", "t", "h", ["A", "B"])], stocked)
convergent = build_route("T", [("T", "t", "h", ["M1", "M2"]),
                               ("M1", "t", "h", ["A"]),
                               ("M2", "t", "h", ["B"])], stocked)
print("one-step cost:", route_cost(one_step))
print("convergent cost:", route_cost(convergent))
print("TED between them:", tree_edit_distance(one_step, convergent))

print("\n== pessimistic top-k ==")
gt = ("CC(=O)O", "CN")
# one template applying at two sites; ground truth ranked last among them
outcomes = [[gt, ("CC(=O)O", "CCN")]]
for k in (1, 2):
    pess = topk_single_step([outcomes], [gt], kmax=k)[-1]
    opt = topk_single_step([outcomes], [gt], kmax=k, pessimistic=False)[-1]
    print(f"top-{k}: pessimistic {pess:.0%}, optimistic {opt:.0%}")

print("\n== stratified report ==")
outcomes = [
    TargetOutcome("t1", solved=True, gt_rank=1, predicted_length=2,
                  gt_length=2, stratum=2),
    TargetOutcome("t2", solved=True, gt_rank=3, predicted_length=2,
                  gt_length=3, stratum=3),
    TargetOutcome("t3", solved=False, gt_rank=None, predicted_length=None,
                  gt_length=4, stratum=4),
]
print(stratified_report(outcomes, kmax=5, strata="route length").to_text())

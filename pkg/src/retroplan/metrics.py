"""Evaluation machinery: route cost, tree edit distance, pessimistic
top-k single-step accuracy, solve rate, route accuracy, stratified
reports.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .routes import RouteNode, RouteTree

DEFAULT_REACTION_COST = 1.0
DEFAULT_YIELD = 0.8


def route_cost(route: RouteTree, eps: float = DEFAULT_REACTION_COST,
               yld: float = DEFAULT_YIELD) -> float:
    """Recursive route cost; leaves cost 0 so a 1-step route costs eps."""
    if not 0 < yld <= 1:
        raise ValueError("yield must be in (0, 1]")

    def cost(node: RouteNode) -> float:
        if node.step is None:
            return 0.0
        return eps + sum(cost(c) / yld for c in node.step.nodes)

    return cost(route.root)


# ---------------------------------------------------------------------------
# tree edit distance (Zhang-Shasha) on canonically ordered molecule trees

class _TedNode:
    __slots__ = ("label", "children")

    def __init__(self, label: str, children: list):
        self.label = label
        self.children = children


def _ordered_tree(node: RouteNode) -> _TedNode:
    children = []
    if node.step is not None:
        children = [_ordered_tree(c) for c in node.step.nodes]
        children.sort(key=lambda t: (t.label, _ted_serial(t)))
    return _TedNode(node.smiles, children)


def _ted_serial(t: _TedNode) -> str:
    return f"({t.label}{''.join(_ted_serial(c) for c in t.children)})"


def _annotate(root: _TedNode):
    """Postorder labels, leftmost-leaf-descendant indices, keyroots."""
    labels: list[str] = []
    lmds: list[int] = []

    def rec(n: _TedNode) -> int:
        child_indices = [rec(c) for c in n.children]
        idx = len(labels)
        labels.append(n.label)
        lmds.append(lmds[child_indices[0]] if child_indices else idx)
        return idx

    rec(root)
    keyroot_of_lmd: dict[int, int] = {}
    for i, l in enumerate(lmds):
        keyroot_of_lmd[l] = i  # postorder max wins
    return labels, lmds, sorted(keyroot_of_lmd.values())


def tree_edit_distance(a: RouteTree, b: RouteTree) -> int:
    """Ordered-tree edit distance with unit costs after canonical child
    ordering; zero exactly when the molecule trees are label-isomorphic."""
    la, lma, kra = _annotate(_ordered_tree(a.root))
    lb, lmb, krb = _annotate(_ordered_tree(b.root))
    na, nb = len(la), len(lb)
    treedist = np.zeros((na, nb), dtype=np.int64)

    for i in kra:
        for j in krb:
            m = i - lma[i] + 2
            n = j - lmb[j] + 2
            fd = np.zeros((m, n), dtype=np.int64)
            ioff = lma[i] - 1
            joff = lmb[j] - 1
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + 1
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + 1
            for x in range(1, m):
                for y in range(1, n):
                    if lma[i] == lma[x + ioff] and lmb[j] == lmb[y + joff]:
                        relabel = 0 if la[x + ioff] == lb[y + joff] else 1
                        fd[x, y] = min(fd[x - 1, y] + 1,
                                       fd[x, y - 1] + 1,
                                       fd[x - 1, y - 1] + relabel)
                        treedist[x + ioff, y + joff] = fd[x, y]
                    else:
                        p = lma[x + ioff] - 1 - ioff
                        q = lmb[y + joff] - 1 - joff
                        fd[x, y] = min(fd[x - 1, y] + 1,
                                       fd[x, y - 1] + 1,
                                       fd[p, q] + treedist[x + ioff, y + joff])
    return int(treedist[na - 1, nb - 1])


# ---------------------------------------------------------------------------
# single-step accuracy

ReactantKey = tuple[str, ...]


def rank_predictions(
    outcomes: list[list[ReactantKey]],
    ground_truth: ReactantKey,
    pessimistic: bool = True,
) -> list[ReactantKey]:
    """Flatten per-template multi-site outcomes into one ranked list.

    A template contributing m reactant sets occupies m consecutive ranks;
    in the pessimistic setting the ground-truth set goes last within its
    template's outcomes. Duplicates keep their first occurrence.
    """
    ranked: list[ReactantKey] = []
    seen: set[ReactantKey] = set()
    for sets in outcomes:
        hits = [s for s in sets if s == ground_truth]
        rest = [s for s in sets if s != ground_truth]
        group = rest + hits if pessimistic else hits + rest
        for s in group:
            if s not in seen:
                seen.add(s)
                ranked.append(s)
    return ranked


def topk_single_step(
    predictions: list[list[list[ReactantKey]]],
    ground_truths: list[ReactantKey],
    kmax: int,
    pessimistic: bool = True,
) -> np.ndarray:
    """accuracy[k-1] = fraction of targets whose ground truth appears in
    the first k ranked predictions."""
    if len(predictions) != len(ground_truths):
        raise ValueError("predictions and ground truths differ in length")
    hits = np.zeros(kmax, dtype=np.int64)
    for outcomes, gt in zip(predictions, ground_truths):
        ranked = rank_predictions(outcomes, gt, pessimistic=pessimistic)
        try:
            rank = ranked.index(gt) + 1
        except ValueError:
            continue
        if rank <= kmax:
            hits[rank - 1 :] += 1
    return hits / max(len(predictions), 1)


def gt_rank_of_routes(
    ranked_routes: list[RouteTree], ground_truth: RouteTree
) -> int | None:
    """1-based rank of the first route at tree edit distance zero."""
    for i, r in enumerate(ranked_routes, 1):
        if tree_edit_distance(r, ground_truth) == 0:
            return i
    return None


def route_accuracy(
    predicted: list[list[RouteTree]],
    ground_truths: list[RouteTree],
    kmax: int,
) -> np.ndarray:
    if len(predicted) != len(ground_truths):
        raise ValueError("predicted and ground truths differ in length")
    hits = np.zeros(kmax, dtype=np.int64)
    for routes, gt in zip(predicted, ground_truths):
        rank = gt_rank_of_routes(routes[:kmax], gt)
        if rank is not None:
            hits[rank - 1 :] += 1
    return hits / max(len(predicted), 1)


def solve_rate(solved_flags) -> float:
    flags = list(solved_flags)
    return sum(bool(f) for f in flags) / max(len(flags), 1)


# ---------------------------------------------------------------------------
# stratified reporting

class MissingStratumMetadataError(ValueError):
    pass


@dataclass
class TargetOutcome:
    """Per-target evaluation facts feeding stratified reports."""

    target: str
    solved: bool
    gt_rank: int | None = None          # rank of a TED-0 route, if any
    predicted_length: int | None = None  # steps in the rank-1 route
    gt_length: int | None = None
    stratum: object = None


@dataclass
class EvalReport:
    kmax: int
    accuracy: list[float]
    solve_rate: float
    n: int
    buckets: dict = field(default_factory=dict)
    length_diff_histogram: dict = field(default_factory=dict)
    invalid_count: int = 0
    duplicate_count: int = 0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "kmax": self.kmax,
            "accuracy": self.accuracy,
            "solve_rate": self.solve_rate,
            "buckets": {str(k): v for k, v in sorted(
                self.buckets.items(), key=lambda kv: str(kv[0]))},
            "length_diff_histogram": {
                str(k): v for k, v in sorted(self.length_diff_histogram.items())},
            "invalid_count": self.invalid_count,
            "duplicate_count": self.duplicate_count,
        }

    def to_text(self) -> str:
        lines = [f"targets: {self.n}   solve rate: {self.solve_rate:.3f}"]
        ks = _report_ks(self.kmax)
        header = "bucket".ljust(18) + "n".rjust(6) + "solve".rjust(8)
        header += "".join(f"top-{k}".rjust(9) for k in ks)
        lines.append(header)
        global_row = {"n": self.n, "solve_rate": self.solve_rate,
                      "accuracy": self.accuracy}
        for name, row in [("all", global_row)] + sorted(
                self.buckets.items(), key=lambda kv: str(kv[0])):
            cells = str(name)[:18].ljust(18) + str(row["n"]).rjust(6)
            cells += f"{row['solve_rate']:.3f}".rjust(8)
            for k in ks:
                acc = row["accuracy"][k - 1] if row["n"] else float("nan")
                cells += f"{acc:.3f}".rjust(9)
            lines.append(cells)
        if self.length_diff_histogram:
            lines.append("length diff (predicted - ground truth):")
            for d, c in sorted(self.length_diff_histogram.items()):
                lines.append(f"  {d:+d}: {c}")
        return "\n".join(lines)

    def to_csv(self) -> str:
        ks = _report_ks(self.kmax)
        rows = ["bucket,n,solve_rate," + ",".join(f"top{k}" for k in ks)]
        all_rows = [("all", {"n": self.n, "solve_rate": self.solve_rate,
                             "accuracy": self.accuracy})]
        all_rows += sorted(self.buckets.items(), key=lambda kv: str(kv[0]))
        for name, row in all_rows:
            cells = [str(name), str(row["n"]), f"{row['solve_rate']:.6f}"]
            for k in ks:
                cells.append(f"{row['accuracy'][k - 1]:.6f}" if row["n"] else "")
            rows.append(",".join(cells))
        return "\n".join(rows) + "\n"


def _report_ks(kmax: int) -> list[int]:
    return [k for k in (1, 3, 5, 10, 20, 50) if k <= kmax] or [kmax]


def _accuracy_vector(outcomes: list[TargetOutcome], kmax: int) -> list[float]:
    if not outcomes:
        return [0.0] * kmax
    hits = np.zeros(kmax, dtype=np.int64)
    for o in outcomes:
        if o.gt_rank is not None and o.gt_rank <= kmax:
            hits[o.gt_rank - 1 :] += 1
    return list(hits / len(outcomes))


def stratified_report(
    outcomes: list[TargetOutcome],
    kmax: int = 10,
    strata: str | None = None,
) -> EvalReport:
    """Global metrics plus per-bucket breakdown and the
    predicted-minus-ground-truth length histogram."""
    report = EvalReport(
        kmax=kmax,
        accuracy=_accuracy_vector(outcomes, kmax),
        solve_rate=solve_rate(o.solved for o in outcomes),
        n=len(outcomes),
    )
    hist: Counter = Counter()
    for o in outcomes:
        if o.predicted_length is not None and o.gt_length is not None:
            hist[o.predicted_length - o.gt_length] += 1
    report.length_diff_histogram = dict(hist)

    if strata is not None:
        missing = [o.target for o in outcomes if o.stratum is None]
        if missing:
            raise MissingStratumMetadataError(
                f"no {strata} stratum for targets: {missing[:5]}")
        by_bucket: dict = {}
        for o in outcomes:
            by_bucket.setdefault(o.stratum, []).append(o)
        for bucket, members in by_bucket.items():
            report.buckets[bucket] = {
                "n": len(members),
                "solve_rate": solve_rate(m.solved for m in members),
                "accuracy": _accuracy_vector(members, kmax),
            }
    return report


def report_to_files(report: EvalReport, json_path=None, csv_path=None) -> None:
    if json_path:
        with open(json_path, "w") as fh:
            json.dump(report.to_json(), fh, indent=1)
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(report.to_csv())

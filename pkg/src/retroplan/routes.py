"""Route trees: the object scored, ranked, and compared.

A route is a rooted tree of molecules; each non-leaf molecule carries one
reaction step (template annotation + precursor subtrees). The JSON form
is shared by the search and direct planners:

    {"smiles": str, "in_stock": bool,
     "children": [{"template": smarts, "nodes": [...recursive...]}]}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


@dataclass
class RouteStep:
    template_smarts: str
    template_hash: str
    nodes: tuple["RouteNode", ...]


@dataclass
class RouteNode:
    smiles: str
    in_stock: bool = False
    step: RouteStep | None = None

    def leaves(self):
        if self.step is None:
            yield self
            return
        for child in self.step.nodes:
            yield from child.leaves()

    def walk(self):
        yield self
        if self.step is not None:
            for child in self.step.nodes:
                yield from child.walk()


@dataclass
class RouteTree:
    root: RouteNode
    log_prob: float | None = None
    _serial: list = field(default_factory=list, repr=False, compare=False)

    @property
    def solved(self) -> bool:
        return all(leaf.in_stock for leaf in self.root.leaves())

    @property
    def length(self) -> int:
        """Number of reaction steps."""
        return sum(1 for n in self.root.walk() if n.step is not None)

    def serial(self) -> str:
        """Canonical molecule-tree serialization (templates excluded)."""
        if not self._serial:
            self._serial.append(_node_serial(self.root))
        return self._serial[0]

    def route_hash(self) -> str:
        return hashlib.sha256(self.serial().encode()).hexdigest()

    def to_json(self) -> dict:
        return _node_json(self.root)

    @classmethod
    def from_json(cls, data: dict, log_prob: float | None = None) -> "RouteTree":
        return cls(_node_from_json(data), log_prob=log_prob)

    def to_dot(self) -> str:
        lines = ["digraph route {", '  node [shape=box];']
        counter = [0]

        def rec(node: RouteNode) -> int:
            nid = counter[0]
            counter[0] += 1
            style = ' style=filled fillcolor="#ccffcc"' if node.in_stock else ""
            lines.append(f'  n{nid} [label="{node.smiles}"{style}];')
            if node.step is not None:
                for child in node.step.nodes:
                    cid = rec(child)
                    lines.append(f"  n{nid} -> n{cid};")
            return nid

        rec(self.root)
        lines.append("}")
        return "\n".join(lines)


def _node_serial(node: RouteNode) -> str:
    if node.step is None:
        return f"({node.smiles})"
    parts = sorted(_node_serial(c) for c in node.step.nodes)
    return f"({node.smiles}{''.join(parts)})"


def _node_json(node: RouteNode) -> dict:
    children = []
    if node.step is not None:
        children.append({
            "template": node.step.template_smarts,
            "nodes": [_node_json(c) for c in node.step.nodes],
        })
    return {"smiles": node.smiles, "in_stock": node.in_stock,
            "children": children}


def _node_from_json(data: dict) -> RouteNode:
    step = None
    children = data.get("children") or []
    if children:
        entry = children[0]
        step = RouteStep(
            template_smarts=entry.get("template", ""),
            template_hash=entry.get("template_hash", ""),
            nodes=tuple(_node_from_json(n) for n in entry["nodes"]),
        )
    return RouteNode(data["smiles"], bool(data.get("in_stock", False)), step)


def build_route(
    target_smiles: str,
    steps: list[tuple[str, str, str, list[str]]],
    in_stock,
    log_prob: float | None = None,
) -> RouteTree:
    """Assemble a RouteTree from an ordered reaction chain.

    Each step is (product smiles, template smarts, template hash,
    reactant smiles list). Molecule sets deduplicate by canonical form, so
    one disconnection resolves every occurrence of its product: the step
    attaches to every currently open leaf carrying that label.
    """
    root = RouteNode(target_smiles, in_stock(target_smiles))
    for product, smarts, thash, reactants in steps:
        leaves = [lf for lf in root.leaves()
                  if lf.smiles == product and lf.step is None]
        if not leaves:
            raise ValueError(f"no open leaf {product!r} for step")
        for leaf in leaves:
            leaf.step = RouteStep(
                smarts, thash,
                tuple(RouteNode(r, in_stock(r)) for r in reactants))
    return RouteTree(root)


def routes_to_json_file(path, routes: list[RouteTree]) -> None:
    payload = []
    for r in routes:
        rec = r.to_json()
        if r.log_prob is not None:
            rec["log_prob"] = r.log_prob
        payload.append(rec)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)

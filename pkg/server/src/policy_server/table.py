"""Lookup-table backend over the compiled policy-table JSON file.

The file format is the planning engine's external interface:

    {"products": {smiles: [[smarts, count], ...]},
     "global_counts": [[smarts, count], ...],
     "routes": {smiles: [[[smarts, ...], log_prob], ...]}}

Scoring must stay numerically identical to the engine's in-process table
backend (local entries score count+1, global fallback entries score below
one, log of score over the per-query total), because protocol conformance
is checked by byte-comparing ranked route JSON produced both ways.
"""

from __future__ import annotations

import json
import math
import re


class TableError(ValueError):
    pass


_SMILES_SANE_RE = re.compile(r"^[A-Za-z0-9\[\]()@+\-=#:/\\.%*~$]+$")


def smiles_looks_valid(smiles: str) -> bool:
    """Cheap syntactic screen: legal characters, balanced brackets and
    parentheses. The engine performs real parsing; the server only rejects
    obvious garbage."""
    if not smiles or not _SMILES_SANE_RE.match(smiles):
        return False
    depth = 0
    for ch in smiles:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return False
    if depth != 0:
        return False
    bracket = 0
    for ch in smiles:
        if ch == "[":
            bracket += 1
            if bracket > 1:
                return False
        elif ch == "]":
            bracket -= 1
            if bracket < 0:
                return False
    return bracket == 0


_STEPS_RE = re.compile(r"^<STEPS=(\d+)>$")


def condition_steps(condition: str | None) -> int | None:
    if condition is None:
        return None
    m = _STEPS_RE.match(condition)
    return int(m.group(1)) if m else None


class TableBackend:
    def __init__(self, products, global_counts, routes):
        self.products = products
        self.global_counts = global_counts
        self.routes = routes

    @classmethod
    def load(cls, path) -> "TableBackend":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise TableError(f"cannot load policy table {path}: {e}") from e
        return cls(
            products={s: [(t, int(c)) for t, c in entries]
                      for s, entries in data.get("products", {}).items()},
            global_counts=[(t, int(c))
                           for t, c in data.get("global_counts", [])],
            routes={s: [(list(ts), float(lp)) for ts, lp in entries]
                    for s, entries in data.get("routes", {}).items()},
        )

    def propose(self, smiles: str, k: int) -> list[dict]:
        local = self.products.get(smiles, [])
        chosen: list[tuple[str, float]] = []
        seen: set[str] = set()
        scores: list[float] = []
        global_total = sum(c for _s, c in self.global_counts) + len(
            self.global_counts) or 1
        for smarts, count in local:
            seen.add(smarts)
            scores.append(float(count + 1))
            chosen.append((smarts, 0.0))
        for smarts, count in self.global_counts:
            if len(chosen) >= k:
                break
            if smarts in seen:
                continue
            seen.add(smarts)
            scores.append((count + 1) / global_total)
            chosen.append((smarts, 0.0))
        total = sum(scores)
        return [
            {"smarts": smarts, "log_prob": math.log(score / total)}
            for (smarts, _), score in zip(chosen[:k], scores[:k])
        ]

    def propose_route(self, smiles: str, n_samples: int,
                      condition: str | None) -> tuple[list[dict], str | None]:
        """Returns (routes, warning). Unsupported conditions fall back to
        unconditioned samples with a warning."""
        stored = self.routes.get(smiles, [])
        warning = None
        steps = condition_steps(condition)
        if condition is not None and steps is None:
            warning = f"unsupported condition {condition!r}; returning " \
                      f"unconditioned samples"
            selected = list(stored)
        elif steps is not None:
            selected = [e for e in stored if len(e[0]) == steps]
            if not selected:
                selected = list(stored)
        else:
            selected = list(stored)
        routes = [{"templates": list(ts), "log_prob": lp}
                  for ts, lp in selected[:n_samples]]
        return routes, warning

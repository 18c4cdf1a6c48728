"""Template proposal policies.

A backend is anything with ``propose_raw(smiles, k, condition)`` returning
(smarts, log_prob) pairs; route-capable backends also implement
``sample_route_sequences``. The engine parses and validates every SMARTS,
deduplicates by template hash, applies strict library filtering before
top-k truncation, and normalizes MCTS priors with a temperature softmax.
"""

from __future__ import annotations

import json
import logging
import math
import threading
from dataclasses import dataclass, field, replace

import requests

from .chem.mol import Molecule
from .templates import (
    RetroTemplate,
    TemplateError,
    TemplateLibrary,
    parse_retro_template,
    template_hash,
)
from .chem.smarts import SmartsError

logger = logging.getLogger(__name__)

DEFAULT_PROPOSALS = 10
DEFAULT_TEMPERATURE = 3.0
SINGLE_STEP_BEAM = 100
MULTI_STEP_BEAM = 15


class BackendUnavailableError(RuntimeError):
    pass


class EmptyDatasetError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyProposal:
    template: RetroTemplate
    log_prob: float
    condition: str | None = None

    @property
    def smarts(self) -> str:
        return self.template.source_smarts

    @property
    def hash(self) -> str:
        return template_hash(self.template)


@dataclass
class PolicyConfig:
    k: int = DEFAULT_PROPOSALS
    temperature: float = DEFAULT_TEMPERATURE
    strict: bool = False
    library: TemplateLibrary | None = None
    beam_size: int = SINGLE_STEP_BEAM  # candidates requested from backends

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if self.strict and self.library is None:
            raise ValueError("strict filtering needs a template library")

    def with_k(self, k: int) -> "PolicyConfig":
        return replace(self, k=k)


def propose(backend, target: Molecule, cfg: PolicyConfig,
            condition: str | None = None) -> list[PolicyProposal]:
    """Validated, deduplicated, strict-filtered, top-k template proposals,
    sorted by descending log probability."""
    raw = backend.propose_raw(target.canonical(),
                              max(cfg.k, cfg.beam_size), condition)
    dropped = 0
    by_hash: dict[str, PolicyProposal] = {}
    for smarts, log_prob in raw:
        try:
            template = parse_retro_template(smarts)
            h = template_hash(template)
        except (TemplateError, SmartsError):
            dropped += 1
            continue
        prop = PolicyProposal(template, float(log_prob), condition)
        if h not in by_hash or prop.log_prob > by_hash[h].log_prob:
            by_hash[h] = prop
    if dropped:
        logger.debug("dropped %d unparseable proposals", dropped)

    proposals = list(by_hash.items())
    if cfg.strict:
        proposals = [(h, p) for h, p in proposals
                     if cfg.library.lookup_hash(h) is not None]
    ranked = sorted((p for _h, p in proposals),
                    key=lambda p: -p.log_prob)
    return ranked[: cfg.k]


def normalize_priors(proposals, temperature: float) -> list[float]:
    """Softmax of log-probabilities at the given temperature; sums to 1
    and never reorders."""
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    log_probs = [p.log_prob if isinstance(p, PolicyProposal) else float(p)
                 for p in proposals]
    if not log_probs:
        raise ValueError("need at least one proposal")
    top = max(log_probs)
    weights = [math.exp((lp - top) / temperature) for lp in log_probs]
    total = sum(weights)
    return [w / total for w in weights]


# ---------------------------------------------------------------------------
# table backend: offline stand-in for a trained sequence model

@dataclass
class TablePolicy:
    """Exact-product lookup first, then global-frequency fallback.

    Local templates score (count + 1) and global fallback templates score
    below 1, so recorded disconnections always outrank the fallback;
    log-probs are the log of each score over the per-query total.
    """

    products: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    global_counts: list[tuple[str, int]] = field(default_factory=list)
    routes: dict[str, list[tuple[list[str], float]]] = field(default_factory=dict)

    def propose_raw(self, smiles: str, k: int,
                    condition: str | None = None) -> list[tuple[str, float]]:
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
        return [(smarts, math.log(score / total))
                for (smarts, _), score in zip(chosen[:k], scores[:k])]

    def sample_route_sequences(
        self, smiles: str, n_samples: int, condition: str | None = None
    ) -> list[tuple[list[str], float]]:
        """Stored route sequences when available, filtered by a
        ``<STEPS=n>`` condition; otherwise chained single-step proposals."""
        stored = self.routes.get(smiles)
        if stored is not None:
            selected = _filter_by_condition(stored, condition)
            return selected[:n_samples]
        return self._chain_sequences(smiles, n_samples, condition)

    def _chain_sequences(self, smiles: str, n_samples: int,
                         condition: str | None):
        from .templates import apply_template

        steps = _condition_steps(condition)
        max_depth = steps if steps is not None else 5
        out: list[tuple[list[str], float]] = []

        def grow(mol: Molecule, prefix: list[str], logp: float, depth: int):
            if len(out) >= n_samples:
                return
            if depth == max_depth:
                if prefix:
                    out.append((list(prefix), logp))
                return
            raws = self.propose_raw(mol.canonical(), 3)
            advanced = False
            for smarts, lp in raws:
                try:
                    template = parse_retro_template(smarts)
                    sets = apply_template(template, mol)
                except (TemplateError, SmartsError):
                    continue
                if not sets:
                    continue
                advanced = True
                nxt = max(sets[0].molecules, key=lambda m: m.num_atoms)
                grow(nxt, prefix + [smarts], logp + lp, depth + 1)
                if len(out) >= n_samples:
                    return
            if not advanced and prefix and (steps is None or depth == steps):
                out.append((list(prefix), logp))

        mol = _parse_target(smiles)
        if mol is not None:
            grow(mol, [], 0.0, 0)
        return out

    def to_json(self) -> dict:
        return {
            "products": {s: [[t, c] for t, c in entries]
                         for s, entries in sorted(self.products.items())},
            "global_counts": [[t, c] for t, c in self.global_counts],
            "routes": {s: [[list(ts), lp] for ts, lp in entries]
                       for s, entries in sorted(self.routes.items())},
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def from_json(cls, data: dict) -> "TablePolicy":
        return cls(
            products={s: [(t, int(c)) for t, c in entries]
                      for s, entries in data.get("products", {}).items()},
            global_counts=[(t, int(c))
                           for t, c in data.get("global_counts", [])],
            routes={s: [(list(ts), float(lp)) for ts, lp in entries]
                    for s, entries in data.get("routes", {}).items()},
        )

    @classmethod
    def load(cls, path) -> "TablePolicy":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _parse_target(smiles: str) -> Molecule | None:
    from .chem.parse import parse_smiles, SmilesError

    try:
        return parse_smiles(smiles)
    except SmilesError:
        return None


def _condition_steps(condition: str | None) -> int | None:
    if condition and condition.startswith("<STEPS=") and condition.endswith(">"):
        try:
            return int(condition[len("<STEPS=") : -1])
        except ValueError:
            return None
    return None


def _filter_by_condition(stored, condition: str | None):
    steps = _condition_steps(condition)
    if steps is None:
        return list(stored)
    filtered = [entry for entry in stored if len(entry[0]) == steps]
    return filtered if filtered else list(stored)


def build_table_policy(records) -> TablePolicy:
    """Build the lookup backend from (product smiles, template smarts)
    pairs; smarts are stored as given, products keyed canonically."""
    from .chem.parse import parse_smiles

    products: dict[str, dict[str, int]] = {}
    global_counts: dict[str, int] = {}
    n = 0
    for product_smiles, smarts in records:
        n += 1
        canonical = parse_smiles(product_smiles).canonical()
        bucket = products.setdefault(canonical, {})
        bucket[smarts] = bucket.get(smarts, 0) + 1
        global_counts[smarts] = global_counts.get(smarts, 0) + 1
    if n == 0:
        raise EmptyDatasetError("no reactions to build the table from")
    table = TablePolicy()
    table.products = {
        s: sorted(bucket.items(), key=lambda tc: (-tc[1], tc[0]))
        for s, bucket in products.items()
    }
    table.global_counts = sorted(
        global_counts.items(), key=lambda tc: (-tc[1], tc[0]))
    return table


def add_route_table(table: TablePolicy, routes) -> None:
    """Attach (target smiles, template smarts sequence) route samples;
    log-prob favors shorter sequences, ties broken by insertion order."""
    from .chem.parse import parse_smiles

    for target_smiles, sequence in routes:
        canonical = parse_smiles(target_smiles).canonical()
        entries = table.routes.setdefault(canonical, [])
        entries.append((list(sequence), -float(len(sequence))))
    for entries in table.routes.values():
        entries.sort(key=lambda e: -e[1])


# ---------------------------------------------------------------------------
# HTTP backend client

class HttpPolicy:
    """Client for the policy wire protocol served by a policy server.

    Sessions are per-thread so concurrent propose calls from a planner
    worker pool stay safe.
    """

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._local = threading.local()

    def _session(self) -> requests.Session:
        if not hasattr(self._local, "session"):
            self._local.session = requests.Session()
        return self._local.session

    def _post(self, endpoint: str, payload: dict) -> dict:
        url = f"{self.base_url}{endpoint}"
        try:
            resp = self._session().post(url, json=payload,
                                        timeout=self.timeout)
        except requests.RequestException as e:
            raise BackendUnavailableError(f"POST {url}: {e}") from e
        if not 200 <= resp.status_code < 300:
            raise BackendUnavailableError(
                f"POST {url}: HTTP {resp.status_code}: {resp.text[:200]}")
        return resp.json()

    def propose_raw(self, smiles: str, k: int,
                    condition: str | None = None) -> list[tuple[str, float]]:
        payload: dict = {"smiles": smiles, "k": k}
        if condition is not None:
            payload["condition"] = condition
        data = self._post("/v1/propose", payload)
        return [(p["smarts"], float(p["log_prob"]))
                for p in data.get("proposals", [])]

    def sample_route_sequences(
        self, smiles: str, n_samples: int, condition: str | None = None
    ) -> list[tuple[list[str], float]]:
        payload: dict = {"smiles": smiles, "n_samples": n_samples}
        if condition is not None:
            payload["condition"] = condition
        data = self._post("/v1/propose_route", payload)
        return [(list(r["templates"]), float(r["log_prob"]))
                for r in data.get("routes", [])]

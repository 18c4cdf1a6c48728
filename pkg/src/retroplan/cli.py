"""Command-line surface.

Pipeline subcommands stream reaction JSONL through the filter, template
extraction, library/route/vocabulary builders; planning subcommands run
the tree search or the direct scans against a table policy file or a
policy server; eval subcommands score prediction files. Every run writes
a manifest next to its primary output recording config, input hashes, and
output hashes, so identical inputs are checkable for identical outputs.

Exit codes: 1 unreadable input, 2 configuration error, 3 policy backend
unreachable, 4 evaluation input schema mismatch.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import click

from . import __version__
from .chem.parse import SmilesError, parse_smiles
from .dataset import (
    FILTER_RULES,
    build_hard_split,
    build_routes,
    filter_reaction,
    read_reaction_jsonl,
    split_by_molweight,
    write_reaction_jsonl,
)
from .direct import SCAN_PLANS, condition_scan, rank_direct_routes
from .metrics import (
    TargetOutcome,
    rank_predictions,
    report_to_files,
    stratified_report,
    tree_edit_distance,
)
from .policy import (
    BackendUnavailableError,
    HttpPolicy,
    PolicyConfig,
    TablePolicy,
    add_route_table,
    build_table_policy,
)
from .routes import RouteTree
from .search import SearchConfig, extract_routes, run_search
from .stock import load_stock
from .templates import (
    TemplateError,
    TemplateLibrary,
    extract_template,
    template_hash,
)
from .tokenizers import bpe_train, save_vocabulary

logger = logging.getLogger("retroplan")

EXIT_BAD_INPUT = 1
EXIT_BAD_CONFIG = 2
EXIT_BACKEND_DOWN = 3
EXIT_SCHEMA = 4


# ---------------------------------------------------------------------------
# config file + manifest plumbing

def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise click.exceptions.Exit(EXIT_BAD_INPUT) from e
    except json.JSONDecodeError:
        click.echo(f"config file {path} is not valid JSON", err=True)
        raise click.exceptions.Exit(EXIT_BAD_CONFIG)
    if not isinstance(cfg, dict):
        click.echo("config root must be an object", err=True)
        raise click.exceptions.Exit(EXIT_BAD_CONFIG)
    return cfg


def _resolve(cli_value, config: dict, section: str, key: str, default):
    """CLI flag > config file section > built-in default."""
    if cli_value is not None:
        return cli_value
    return config.get(section, {}).get(key, default)


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_write_json(path: str, payload) -> None:
    _atomic_write_text(path, json.dumps(payload, indent=1) + "\n")


def write_manifest(command: str, params: dict, inputs: list[str],
                   outputs: list[str], started: float) -> str:
    snapshot = {k: v for k, v in sorted(params.items())}
    manifest = {
        "command": command,
        "config": snapshot,
        "inputs": {p: _sha256_file(p) for p in inputs if p and os.path.exists(p)},
        "outputs": {p: _sha256_file(p) for p in outputs if os.path.exists(p)},
        "tool_version": __version__,
        "wall_time_s": round(time.monotonic() - started, 6),
    }
    fingerprint_src = json.dumps(
        {k: manifest[k] for k in ("command", "config", "inputs", "outputs")},
        sort_keys=True)
    manifest["fingerprint"] = hashlib.sha256(fingerprint_src.encode()).hexdigest()
    primary = outputs[0] if outputs else f"{command}.out"
    path = f"{primary}.manifest.json"
    _atomic_write_json(path, manifest)
    return path


def _open_input(path: str):
    if not os.path.exists(path):
        click.echo(f"input file not found: {path}", err=True)
        raise click.exceptions.Exit(EXIT_BAD_INPUT)


@click.group()
@click.version_option(__version__)
def main():
    """Retrosynthesis planning, data pipeline, and evaluation tools."""
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# pipeline commands

@main.command("filter")
@click.option("--in", "in_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--report", "report_path", default=None)
def cmd_filter(in_path, out_path, report_path):
    """Apply the reaction cleaning rules; print per-rule rejection counts."""
    started = time.monotonic()
    _open_input(in_path)
    kept = []
    counters = {rule: 0 for rule in FILTER_RULES}
    modified_count = 0
    errors = 0
    for ln, rec, err in read_reaction_jsonl(in_path):
        if err is not None:
            logger.warning("%s:%d skipped: %s", in_path, ln, err)
            errors += 1
            continue
        accept, modified, report = filter_reaction(rec)
        if report.removed_reactants:
            modified_count += 1
            counters["noncontributing_reactants_removed"] += 1
        for rule in report.failed_rules():
            counters[rule] += 1
        if accept:
            kept.append(modified)
    write_reaction_jsonl(out_path, kept)
    summary = {
        "kept": len(kept),
        "rule_counters": counters,
        "modified": modified_count,
        "unparseable": errors,
    }
    for rule, count in counters.items():
        click.echo(f"{rule}: {count}", err=True)
    outputs = [out_path]
    if report_path:
        _atomic_write_json(report_path, summary)
        outputs.append(report_path)
    write_manifest("filter", {"in": in_path, "out": out_path}, [in_path],
                   outputs, started)


@main.command("extract-templates")
@click.option("--in", "in_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--radius", default=1, show_default=True)
def cmd_extract_templates(in_path, out_path, radius):
    """Annotate reactions with extracted retro templates."""
    started = time.monotonic()
    _open_input(in_path)
    out_records = []
    failed = 0
    for ln, rec, err in read_reaction_jsonl(in_path):
        if err is not None:
            logger.warning("%s:%d skipped: %s", in_path, ln, err)
            continue
        try:
            t = extract_template(list(rec.reactants), rec.product,
                                 radius=radius)
        except (TemplateError, ValueError) as e:
            logger.warning("%s:%d no template: %s", in_path, ln, e)
            failed += 1
            continue
        from dataclasses import replace

        out_records.append(replace(
            rec, template_smarts=t.source_smarts,
            template_hash=template_hash(t)))
    write_reaction_jsonl(out_path, out_records)
    click.echo(f"templates extracted: {len(out_records)}, failed: {failed}",
               err=True)
    write_manifest("extract-templates",
                   {"in": in_path, "out": out_path, "radius": radius},
                   [in_path], [out_path], started)


@main.command("build-library")
@click.option("--in", "in_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--min-count", default=1, show_default=True)
def cmd_build_library(in_path, out_path, min_count):
    """Aggregate extracted templates into a hash-keyed library."""
    started = time.monotonic()
    _open_input(in_path)
    lib = TemplateLibrary()
    for ln, rec, err in read_reaction_jsonl(in_path):
        if err is not None or not rec.template_smarts:
            continue
        lib.add(rec.template_smarts)
    lib = lib.filtered(min_count)
    lib.save(out_path)
    click.echo(f"library size: {len(lib)}", err=True)
    write_manifest("build-library",
                   {"in": in_path, "out": out_path, "min_count": min_count},
                   [in_path], [out_path], started)


@main.command("build-routes")
@click.option("--in", "in_path", required=True)
@click.option("--out", "out_path", required=True)
def cmd_build_routes(in_path, out_path):
    """Chain patent reactions into multi-step route trees."""
    started = time.monotonic()
    _open_input(in_path)
    records = [rec for _ln, rec, err in read_reaction_jsonl(in_path)
               if err is None]
    routes = build_routes(records)
    _atomic_write_json(out_path, [r.to_json() for r in routes])
    click.echo(f"routes: {len(routes)}", err=True)
    write_manifest("build-routes", {"in": in_path, "out": out_path},
                   [in_path], [out_path], started)


@main.command("split")
@click.option("--in", "in_path", required=True)
@click.option("--mode", type=click.Choice(["hard", "molweight"]),
              required=True)
@click.option("--train-out", required=True)
@click.option("--test-out", required=True)
@click.option("--library", "library_path", default=None,
              help="template library (hard mode)")
@click.option("--cutoff", default=None, type=int,
              help="rarity cutoff (hard mode)")
@click.option("--threshold", default=None, type=float,
              help="product MW threshold in Da (molweight mode)")
@click.option("--config", "config_path", default=None)
def cmd_split(in_path, mode, train_out, test_out, library_path, cutoff,
              threshold, config_path):
    """Build the rarity-based hard split or the molecular-weight split."""
    started = time.monotonic()
    _open_input(in_path)
    config = _load_config(config_path)
    records = [rec for _ln, rec, err in read_reaction_jsonl(in_path)
               if err is None]
    if mode == "hard":
        if not library_path:
            click.echo("--library is required for the hard split", err=True)
            raise click.exceptions.Exit(EXIT_BAD_CONFIG)
        lib = TemplateLibrary.load(library_path)
        cutoff = _resolve(cutoff, config, "dataset", "rarity_cutoff", 10)
        train, test = build_hard_split(records, lib, rarity_cutoff=cutoff)
    else:
        threshold = _resolve(threshold, config, "dataset", "mw_threshold", 500.0)
        train, test = split_by_molweight(records, threshold_da=threshold)
    write_reaction_jsonl(train_out, train)
    write_reaction_jsonl(test_out, test)
    click.echo(f"train: {len(train)}, test: {len(test)}", err=True)
    write_manifest("split",
                   {"in": in_path, "mode": mode, "cutoff": cutoff,
                    "threshold": threshold},
                   [p for p in (in_path, library_path) if p],
                   [train_out, test_out], started)


@main.command("train-bpe")
@click.option("--in", "in_path", required=True,
              help="reaction JSONL with templates, or a plain text corpus")
@click.option("--out", "out_path", required=True)
@click.option("--target-vocab", default=348, show_default=True)
@click.option("--pre-tokenize", is_flag=True, default=False,
              help="fuse bracket atoms into base units before merging")
def cmd_train_bpe(in_path, out_path, target_vocab, pre_tokenize):
    """Train the character BPE over template SMARTS strings."""
    started = time.monotonic()
    _open_input(in_path)
    corpus = []
    if in_path.endswith(".jsonl"):
        for _ln, rec, err in read_reaction_jsonl(in_path):
            if err is None and rec.template_smarts:
                corpus.append(rec.template_smarts)
    else:
        with open(in_path) as fh:
            corpus = [line.strip() for line in fh if line.strip()]
    if not corpus:
        click.echo("empty training corpus", err=True)
        raise click.exceptions.Exit(EXIT_BAD_INPUT)
    try:
        model = bpe_train(corpus, target_vocab=target_vocab,
                          pre_tokenize=pre_tokenize)
    except ValueError as e:
        click.echo(str(e), err=True)
        raise click.exceptions.Exit(EXIT_BAD_CONFIG)
    save_vocabulary(out_path, model)
    click.echo(f"alphabet: {len(model.alphabet)}, merges: {len(model.merges)}",
               err=True)
    write_manifest("train-bpe",
                   {"in": in_path, "out": out_path,
                    "target_vocab": target_vocab,
                    "pre_tokenize": pre_tokenize},
                   [in_path], [out_path], started)


@main.command("build-policy-table")
@click.option("--in", "in_path", required=True,
              help="reaction JSONL with extracted templates")
@click.option("--routes", "routes_path", default=None,
              help="route JSON to serve for direct planning")
@click.option("--out", "out_path", required=True)
def cmd_build_policy_table(in_path, routes_path, out_path):
    """Compile the lookup-table policy consumed by plan and the server."""
    started = time.monotonic()
    _open_input(in_path)
    pairs = []
    for _ln, rec, err in read_reaction_jsonl(in_path):
        if err is None and rec.template_smarts:
            pairs.append((rec.product.canonical(), rec.template_smarts))
    if not pairs:
        click.echo("no templates in input", err=True)
        raise click.exceptions.Exit(EXIT_BAD_INPUT)
    table = build_table_policy(pairs)
    if routes_path:
        _open_input(routes_path)
        with open(routes_path) as fh:
            route_payload = json.load(fh)
        sequences = []
        for entry in route_payload:
            route = RouteTree.from_json(entry)
            templates = _route_template_sequence(route)
            if templates:
                sequences.append((route.root.smiles, templates))
        add_route_table(table, sequences)
    table.save(out_path)
    click.echo(f"products: {len(table.products)}, "
               f"routes: {len(table.routes)}", err=True)
    write_manifest("build-policy-table",
                   {"in": in_path, "routes": routes_path, "out": out_path},
                   [p for p in (in_path, routes_path) if p],
                   [out_path], started)


def _route_template_sequence(route: RouteTree) -> list[str]:
    """Template strings in application (breadth-first) order."""
    out = []
    frontier = [route.root]
    while frontier:
        nxt = []
        for node in frontier:
            if node.step is not None:
                if node.step.template_smarts:
                    out.append(node.step.template_smarts)
                nxt.extend(node.step.nodes)
        frontier = nxt
    return out


# ---------------------------------------------------------------------------
# planning commands

def _make_backend(policy_table, policy_url):
    if policy_url:
        return HttpPolicy(policy_url)
    if policy_table:
        return TablePolicy.load(policy_table)
    click.echo("provide --policy-table or --policy-url", err=True)
    raise click.exceptions.Exit(EXIT_BAD_CONFIG)


def _read_targets(path: str) -> list:
    _open_input(path)
    targets = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                targets.append(parse_smiles(line))
            except SmilesError as e:
                logger.warning("%s:%d bad target skipped: %s", path, ln, e)
    return targets


@main.command("plan")
@click.option("--targets", "targets_path", required=True)
@click.option("--stock", "stock_path", required=True)
@click.option("--policy-table", default=None)
@click.option("--policy-url", default=None)
@click.option("--out", "out_path", required=True)
@click.option("--c-pucb", default=None, type=float, help="default 100")
@click.option("--temperature", default=None, type=float, help="default 3.0")
@click.option("--expansions", default=None, type=int, help="default 10")
@click.option("--max-iterations", default=None, type=int, help="default 500")
@click.option("--time-limit", default=None, type=float, help="default 300 s")
@click.option("--strict", is_flag=True, default=False)
@click.option("--library", "library_path", default=None)
@click.option("--max-routes", default=10, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--config", "config_path", default=None)
def cmd_plan(targets_path, stock_path, policy_table, policy_url, out_path,
             c_pucb, temperature, expansions, max_iterations, time_limit,
             strict, library_path, max_routes, jobs, config_path):
    """Tree-search planning for each target; ranked route JSON + stats."""
    started = time.monotonic()
    config = _load_config(config_path)
    try:
        cfg = SearchConfig(
            c_pucb=_resolve(c_pucb, config, "search", "c_pucb", 100.0),
            temperature=_resolve(temperature, config, "search",
                                 "temperature", 3.0),
            expansions=_resolve(expansions, config, "search", "expansions", 10),
            max_iterations=_resolve(max_iterations, config, "search",
                                    "max_iterations", 500),
            time_limit_s=_resolve(time_limit, config, "search",
                                  "time_limit_s", 300.0),
        )
    except ValueError as e:
        click.echo(f"bad search configuration: {e}", err=True)
        raise click.exceptions.Exit(EXIT_BAD_CONFIG)
    library = TemplateLibrary.load(library_path) if library_path else None
    if strict and library is None:
        click.echo("--strict needs --library", err=True)
        raise click.exceptions.Exit(EXIT_BAD_CONFIG)
    policy_cfg = PolicyConfig(strict=strict, library=library)
    backend = _make_backend(policy_table, policy_url)
    stock = load_stock(stock_path)
    targets = _read_targets(targets_path)

    def plan_one(target):
        result = run_search(target, backend, stock, cfg, policy_cfg)
        routes = extract_routes(result, max_routes=max_routes)
        return {
            "target": target.canonical(),
            "stats": result.stats(),
            "routes": [r.to_json() for r in routes],
        }

    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(plan_one, targets))
        else:
            results = [plan_one(t) for t in targets]
    except BackendUnavailableError as e:
        click.echo(f"policy backend unreachable: {e}", err=True)
        raise click.exceptions.Exit(EXIT_BACKEND_DOWN)

    _atomic_write_json(out_path, results)
    solved = sum(r["stats"]["solved"] for r in results)
    click.echo(f"solved {solved}/{len(results)}", err=True)
    write_manifest("plan",
                   {"targets": targets_path, "stock": stock_path,
                    "c_pucb": cfg.c_pucb, "temperature": cfg.temperature,
                    "expansions": cfg.expansions,
                    "max_iterations": cfg.max_iterations,
                    "time_limit_s": cfg.time_limit_s, "strict": strict,
                    "max_routes": max_routes},
                   [p for p in (targets_path, stock_path, policy_table,
                                library_path) if p],
                   [out_path], started)


@main.command("direct-plan")
@click.option("--targets", "targets_path", required=True)
@click.option("--stock", "stock_path", required=True)
@click.option("--policy-table", default=None)
@click.option("--policy-url", default=None)
@click.option("--out", "out_path", required=True)
@click.option("--variant",
              type=click.Choice(["vanilla", "n-step", "9-step", "leaf-size"]),
              default="vanilla", show_default=True)
@click.option("--max-routes", default=10, show_default=True)
@click.option("--jobs", default=1, show_default=True)
def cmd_direct_plan(targets_path, stock_path, policy_table, policy_url,
                    out_path, variant, max_routes, jobs):
    """Direct route generation via template-sequence sampling scans."""
    started = time.monotonic()
    backend = _make_backend(policy_table, policy_url)
    stock = load_stock(stock_path)
    targets = _read_targets(targets_path)
    variant_key = variant.replace("-", "_").replace("9_step", "nine_step")

    def plan_one(target):
        scored = condition_scan(target, backend, variant_key, stock)
        ranked = rank_direct_routes(scored)[:max_routes]
        return {
            "target": target.canonical(),
            "stats": {"solved": any(r.solved for r, _ in ranked),
                      "candidates": len(scored)},
            "routes": [dict(r.to_json(), log_prob=lp) for r, lp in ranked],
        }

    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(plan_one, targets))
        else:
            results = [plan_one(t) for t in targets]
    except BackendUnavailableError as e:
        click.echo(f"policy backend unreachable: {e}", err=True)
        raise click.exceptions.Exit(EXIT_BACKEND_DOWN)

    _atomic_write_json(out_path, results)
    solved = sum(r["stats"]["solved"] for r in results)
    click.echo(f"solved {solved}/{len(results)}", err=True)
    write_manifest("direct-plan",
                   {"targets": targets_path, "stock": stock_path,
                    "variant": variant, "max_routes": max_routes,
                    "samples": sum(n for _c, n in SCAN_PLANS[variant_key])},
                   [p for p in (targets_path, stock_path, policy_table) if p],
                   [out_path], started)


# ---------------------------------------------------------------------------
# evaluation commands

def _schema_error(path: str, detail: str):
    click.echo(f"schema mismatch in {path}: {detail}", err=True)
    raise click.exceptions.Exit(EXIT_SCHEMA)


@main.command("eval-single-step")
@click.option("--predictions", "pred_path", required=True)
@click.option("--ground-truth", "gt_path", required=True)
@click.option("--kmax", default=10, show_default=True)
@click.option("--optimistic", is_flag=True, default=False,
              help="rank ground truth first within multi-site outcomes")
@click.option("--out", "out_path", required=True)
@click.option("--csv", "csv_path", default=None)
def cmd_eval_single_step(pred_path, gt_path, kmax, optimistic, out_path,
                         csv_path):
    """Top-k accuracy at the precursor level (pessimistic by default)."""
    started = time.monotonic()
    _open_input(pred_path)
    _open_input(gt_path)
    with open(pred_path) as fh:
        preds = json.load(fh)
    with open(gt_path) as fh:
        gts = json.load(fh)
    gt_by_target = {}
    for i, entry in enumerate(gts):
        if "target" not in entry or "reactants" not in entry:
            _schema_error(gt_path, f"entry {i} needs target and reactants")
        gt_by_target[entry["target"]] = tuple(sorted(entry["reactants"]))

    outcomes_list, gt_list = [], []
    for i, entry in enumerate(preds):
        if "target" not in entry or "outcomes" not in entry:
            _schema_error(pred_path, f"entry {i} needs target and outcomes")
        if entry["target"] not in gt_by_target:
            _schema_error(pred_path,
                          f"entry {i}: no ground truth for {entry['target']}")
        outcomes = [[tuple(sorted(rs)) for rs in template_sets]
                    for template_sets in entry["outcomes"]]
        outcomes_list.append(outcomes)
        gt_list.append(gt_by_target[entry["target"]])

    outcomes_targets = []
    duplicates = 0
    for target_entry, outcomes, gt in zip(preds, outcomes_list, gt_list):
        ranked = rank_predictions(outcomes, gt, pessimistic=not optimistic)
        duplicates += sum(len(sets) for sets in outcomes) - len(ranked)
        rank = ranked.index(gt) + 1 if gt in ranked else None
        outcomes_targets.append(TargetOutcome(
            target=target_entry["target"],
            solved=rank is not None,
            gt_rank=rank,
            stratum=target_entry.get("stratum")))
    strata = "stratum" if all(o.stratum is not None
                              for o in outcomes_targets) else None
    report = stratified_report(outcomes_targets, kmax=kmax, strata=strata)
    report.duplicate_count = duplicates
    report_to_files(report, json_path=out_path, csv_path=csv_path)
    click.echo(report.to_text())
    write_manifest("eval-single-step",
                   {"predictions": pred_path, "ground_truth": gt_path,
                    "kmax": kmax, "optimistic": optimistic},
                   [pred_path, gt_path],
                   [p for p in (out_path, csv_path) if p], started)


@main.command("eval-routes")
@click.option("--predictions", "pred_path", required=True)
@click.option("--ground-truth", "gt_path", required=True)
@click.option("--kmax", default=10, show_default=True)
@click.option("--strata", default=None,
              type=click.Choice(["route-length", "template-frequency"]))
@click.option("--out", "out_path", required=True)
@click.option("--csv", "csv_path", default=None)
def cmd_eval_routes(pred_path, gt_path, kmax, strata, out_path, csv_path):
    """Top-k route accuracy by tree edit distance plus solve rate."""
    started = time.monotonic()
    _open_input(pred_path)
    _open_input(gt_path)
    with open(pred_path) as fh:
        preds = json.load(fh)
    with open(gt_path) as fh:
        gts = json.load(fh)
    gt_by_target = {}
    for i, entry in enumerate(gts):
        if "target" not in entry or "route" not in entry:
            _schema_error(gt_path, f"entry {i} needs target and route")
        gt_by_target[entry["target"]] = entry

    outcomes = []
    for i, entry in enumerate(preds):
        if "target" not in entry or "routes" not in entry:
            _schema_error(pred_path, f"entry {i} needs target and routes")
        if entry["target"] not in gt_by_target:
            _schema_error(pred_path,
                          f"entry {i}: no ground truth for {entry['target']}")
        gt_entry = gt_by_target[entry["target"]]
        gt_route = RouteTree.from_json(gt_entry["route"])
        routes = [RouteTree.from_json(r) for r in entry["routes"][:kmax]]
        rank = None
        for k, route in enumerate(routes, 1):
            if tree_edit_distance(route, gt_route) == 0:
                rank = k
                break
        solved = bool(entry.get("stats", {}).get("solved",
                                                 any(r.solved for r in routes)))
        stratum = None
        if strata == "route-length":
            stratum = gt_route.length
        elif strata == "template-frequency":
            stratum = gt_entry.get("template_frequency_bucket")
        outcomes.append(TargetOutcome(
            target=entry["target"], solved=solved, gt_rank=rank,
            predicted_length=routes[0].length if routes else None,
            gt_length=gt_route.length, stratum=stratum))

    report = stratified_report(outcomes, kmax=kmax, strata=strata)
    report_to_files(report, json_path=out_path, csv_path=csv_path)
    click.echo(report.to_text())
    write_manifest("eval-routes",
                   {"predictions": pred_path, "ground_truth": gt_path,
                    "kmax": kmax, "strata": strata},
                   [pred_path, gt_path],
                   [p for p in (out_path, csv_path) if p], started)


if __name__ == "__main__":
    main()

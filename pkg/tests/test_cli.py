"""End-to-end CLI workflows over a temp workspace."""

import json

import pytest
from click.testing import CliRunner

from fixtures import planning_benchmark
from retroplan.cli import main
from retroplan.dataset import ReactionRecord, write_reaction_jsonl


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def workspace(tmp_path):
    """Reactions JSONL + stock + targets derived from fixture chains."""
    chains = planning_benchmark(4, 2)
    records = []
    stock = set()
    targets = []
    for ci, chain in enumerate(chains):
        targets.append(chain.target.canonical())
        stock.update(chain.stock_smiles)
        for ri, rxn in enumerate(chain.reactions):
            records.append(ReactionRecord(
                id=f"c{ci}r{ri}", reactants=tuple(rxn.reactants),
                products=(rxn.product,), patent_id=f"P{ci}",
                raw=rxn.rxn_smiles()))
    rxns = tmp_path / "rxns.jsonl"
    write_reaction_jsonl(rxns, records)
    (tmp_path / "stock.txt").write_text("\n".join(sorted(stock)) + "\n")
    (tmp_path / "targets.txt").write_text("\n".join(targets) + "\n")
    return tmp_path


def _run(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestPipeline:
    def test_filter_reports_all_rules(self, runner, workspace):
        out = workspace / "kept.jsonl"
        report = workspace / "report.json"
        result = _run(runner, [
            "filter", "--in", str(workspace / "rxns.jsonl"),
            "--out", str(out), "--report", str(report)])
        payload = json.loads(report.read_text())
        assert len(payload["rule_counters"]) == 11
        assert out.exists()

    def test_full_pipeline_and_plan(self, runner, workspace):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        lib = str(workspace / "library.jsonl")
        table = str(workspace / "table.json")
        plan_out = str(workspace / "plan.json")

        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        _run(runner, ["build-library", "--in", tpl, "--out", lib])
        _run(runner, ["build-policy-table", "--in", tpl, "--out", table])
        _run(runner, [
            "plan", "--targets", str(workspace / "targets.txt"),
            "--stock", str(workspace / "stock.txt"),
            "--policy-table", table, "--out", plan_out,
            "--max-iterations", "60", "--time-limit", "60"])
        results = json.loads((workspace / "plan.json").read_text())
        assert len(results) == 6
        assert all(r["stats"]["solved"] for r in results)
        assert all(r["routes"] for r in results)

    def test_library_min_count_monotone(self, runner, workspace):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        lib1 = workspace / "lib1.jsonl"
        lib2 = workspace / "lib2.jsonl"
        _run(runner, ["build-library", "--in", tpl, "--out", str(lib1),
                      "--min-count", "1"])
        _run(runner, ["build-library", "--in", tpl, "--out", str(lib2),
                      "--min-count", "3"])
        hashes1 = {json.loads(l)["hash"] for l in lib1.read_text().splitlines()}
        hashes2 = {json.loads(l)["hash"] for l in lib2.read_text().splitlines()}
        assert hashes2 <= hashes1

    def test_build_routes_command(self, runner, workspace):
        out = workspace / "routes.json"
        _run(runner, ["build-routes", "--in", str(workspace / "rxns.jsonl"),
                      "--out", str(out)])
        routes = json.loads(out.read_text())
        assert routes and all("smiles" in r for r in routes)

    def test_split_commands(self, runner, workspace):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        lib = str(workspace / "library.jsonl")
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        _run(runner, ["build-library", "--in", tpl, "--out", lib])
        _run(runner, ["split", "--in", tpl, "--mode", "hard",
                      "--library", lib, "--cutoff", "1",
                      "--train-out", str(workspace / "train.jsonl"),
                      "--test-out", str(workspace / "hard.jsonl")])
        _run(runner, ["split", "--in", tpl, "--mode", "molweight",
                      "--threshold", "120",
                      "--train-out", str(workspace / "mw_train.jsonl"),
                      "--test-out", str(workspace / "mw_test.jsonl")])
        assert (workspace / "train.jsonl").exists()
        assert (workspace / "mw_test.jsonl").exists()

    def test_train_bpe_manifest_records_vocab(self, runner, workspace):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        vocab = workspace / "vocab.json"
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        _run(runner, ["train-bpe", "--in", tpl, "--out", str(vocab),
                      "--target-vocab", "348"])
        manifest = json.loads((workspace / "vocab.json.manifest.json")
                              .read_text())
        assert manifest["config"]["target_vocab"] == 348
        assert vocab.exists()


class TestIdempotence:
    def test_rerun_byte_identical(self, runner, workspace):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        first = open(tpl, "rb").read()
        manifest1 = json.loads(open(tpl + ".manifest.json").read())
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        second = open(tpl, "rb").read()
        manifest2 = json.loads(open(tpl + ".manifest.json").read())
        assert first == second
        assert manifest1["fingerprint"] == manifest2["fingerprint"]


class TestPlanningOptions:
    def test_direct_plan_vanilla(self, runner, workspace):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        routes = str(workspace / "routes.json")
        table = str(workspace / "table.json")
        out = workspace / "direct.json"
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        _run(runner, ["build-routes", "--in", tpl, "--out", routes])
        _run(runner, ["build-policy-table", "--in", tpl, "--routes", routes,
                      "--out", table])
        _run(runner, [
            "direct-plan", "--targets", str(workspace / "targets.txt"),
            "--stock", str(workspace / "stock.txt"),
            "--policy-table", table, "--out", str(out),
            "--variant", "n-step"])
        results = json.loads(out.read_text())
        assert len(results) == 6
        manifest = json.loads((str(out) + ".manifest.json")
                              and open(str(out) + ".manifest.json").read())
        assert manifest["config"]["samples"] == 80
        assert any(r["stats"]["solved"] for r in results)

    def test_plan_with_jobs_deterministic(self, runner, workspace):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        table = str(workspace / "table.json")
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        _run(runner, ["build-policy-table", "--in", tpl, "--out", table])
        outs = []
        for jobs, name in (("1", "p1.json"), ("4", "p4.json")):
            _run(runner, [
                "plan", "--targets", str(workspace / "targets.txt"),
                "--stock", str(workspace / "stock.txt"),
                "--policy-table", table,
                "--out", str(workspace / name),
                "--max-iterations", "40", "--jobs", jobs])
            payload = json.loads((workspace / name).read_text())
            outs.append([(r["target"], r["routes"]) for r in payload])
        assert outs[0] == outs[1]

    def test_plan_strict_with_empty_library_unsolved(self, runner, workspace,
                                                     tmp_path):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        table = str(workspace / "table.json")
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        _run(runner, ["build-policy-table", "--in", tpl, "--out", table])
        empty_lib = tmp_path / "empty.jsonl"
        empty_lib.write_text("")
        out = workspace / "strict.json"
        _run(runner, [
            "plan", "--targets", str(workspace / "targets.txt"),
            "--stock", str(workspace / "stock.txt"),
            "--policy-table", table, "--out", str(out),
            "--strict", "--library", str(empty_lib),
            "--max-iterations", "10", "--time-limit", "10"])
        results = json.loads(out.read_text())
        assert all(not r["stats"]["solved"] for r in results)
        assert all(r["routes"] == [] for r in results)

    def test_config_file_precedence(self, runner, workspace):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        table = str(workspace / "table.json")
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        _run(runner, ["build-policy-table", "--in", tpl, "--out", table])
        cfg = workspace / "cfg.json"
        cfg.write_text(json.dumps({"search": {"max_iterations": 7}}))
        out = workspace / "cfgplan.json"
        _run(runner, [
            "plan", "--targets", str(workspace / "targets.txt"),
            "--stock", str(workspace / "stock.txt"),
            "--policy-table", table, "--out", str(out),
            "--config", str(cfg)])
        manifest = json.loads(open(str(out) + ".manifest.json").read())
        assert manifest["config"]["max_iterations"] == 7
        # CLI flag wins over the config file
        _run(runner, [
            "plan", "--targets", str(workspace / "targets.txt"),
            "--stock", str(workspace / "stock.txt"),
            "--policy-table", table, "--out", str(out),
            "--config", str(cfg), "--max-iterations", "9"])
        manifest = json.loads(open(str(out) + ".manifest.json").read())
        assert manifest["config"]["max_iterations"] == 9


class TestExitCodes:
    def test_missing_input_is_1(self, runner, tmp_path):
        result = runner.invoke(main, [
            "filter", "--in", str(tmp_path / "nope.jsonl"),
            "--out", str(tmp_path / "o.jsonl")])
        assert result.exit_code == 1

    def test_bad_config_is_2(self, runner, workspace):
        cfg = workspace / "bad.json"
        cfg.write_text("{not json")
        result = runner.invoke(main, [
            "plan", "--targets", str(workspace / "targets.txt"),
            "--stock", str(workspace / "stock.txt"),
            "--policy-table", "ignored.json",
            "--out", str(workspace / "o.json"), "--config", str(cfg)])
        assert result.exit_code == 2

    def test_unreachable_policy_is_3(self, runner, workspace):
        result = runner.invoke(main, [
            "plan", "--targets", str(workspace / "targets.txt"),
            "--stock", str(workspace / "stock.txt"),
            "--policy-url", "http://127.0.0.1:1",
            "--out", str(workspace / "o.json"),
            "--max-iterations", "3", "--time-limit", "5"])
        assert result.exit_code == 3

    def test_eval_schema_mismatch_is_4(self, runner, tmp_path):
        pred = tmp_path / "pred.json"
        gt = tmp_path / "gt.json"
        pred.write_text(json.dumps([{"target": "CCO"}]))
        gt.write_text(json.dumps([{"target": "CCO", "reactants": ["CC"]}]))
        result = runner.invoke(main, [
            "eval-single-step", "--predictions", str(pred),
            "--ground-truth", str(gt), "--out", str(tmp_path / "r.json")])
        assert result.exit_code == 4


class TestEval:
    def test_eval_single_step_perfect(self, runner, tmp_path):
        pred = tmp_path / "pred.json"
        gt = tmp_path / "gt.json"
        pred.write_text(json.dumps([
            {"target": "CC(=O)NC", "outcomes": [[["CC(=O)O", "CN"]]]},
        ]))
        gt.write_text(json.dumps([
            {"target": "CC(=O)NC", "reactants": ["CN", "CC(=O)O"]},
        ]))
        out = tmp_path / "report.json"
        _run(runner, ["eval-single-step", "--predictions", str(pred),
                      "--ground-truth", str(gt), "--out", str(out),
                      "--kmax", "5"])
        report = json.loads(out.read_text())
        assert report["accuracy"] == [1.0] * 5

    def test_eval_single_step_pessimistic_vs_optimistic(self, runner,
                                                        tmp_path):
        pred = tmp_path / "pred.json"
        gt = tmp_path / "gt.json"
        # one template with two sites; ground truth is one of them
        pred.write_text(json.dumps([
            {"target": "T",
             "outcomes": [[["GT"], ["OTHER"]]]},
        ]))
        gt.write_text(json.dumps([{"target": "T", "reactants": ["GT"]}]))
        out_p = tmp_path / "p.json"
        out_o = tmp_path / "o.json"
        _run(runner, ["eval-single-step", "--predictions", str(pred),
                      "--ground-truth", str(gt), "--out", str(out_p),
                      "--kmax", "2"])
        _run(runner, ["eval-single-step", "--predictions", str(pred),
                      "--ground-truth", str(gt), "--out", str(out_o),
                      "--kmax", "2", "--optimistic"])
        pess = json.loads(out_p.read_text())["accuracy"]
        opt = json.loads(out_o.read_text())["accuracy"]
        assert pess == [0.0, 1.0]
        assert opt == [1.0, 1.0]
        assert all(p <= o for p, o in zip(pess, opt))

    def test_eval_routes_monotone(self, runner, workspace, tmp_path):
        rxns = str(workspace / "rxns.jsonl")
        tpl = str(workspace / "tpl.jsonl")
        table = str(workspace / "table.json")
        plan_out = workspace / "plan.json"
        _run(runner, ["extract-templates", "--in", rxns, "--out", tpl])
        _run(runner, ["build-policy-table", "--in", tpl, "--out", table])
        _run(runner, [
            "plan", "--targets", str(workspace / "targets.txt"),
            "--stock", str(workspace / "stock.txt"),
            "--policy-table", table, "--out", str(plan_out),
            "--max-iterations", "60"])
        plan_payload = json.loads(plan_out.read_text())
        gt_payload = [{"target": r["target"], "route": r["routes"][0]}
                      for r in plan_payload]
        gt = tmp_path / "gt.json"
        gt.write_text(json.dumps(gt_payload))
        out = tmp_path / "routes_report.json"
        _run(runner, ["eval-routes", "--predictions", str(plan_out),
                      "--ground-truth", str(gt), "--out", str(out),
                      "--kmax", "5", "--strata", "route-length"])
        report = json.loads(out.read_text())
        acc = report["accuracy"]
        assert all(acc[i] <= acc[i + 1] + 1e-12 for i in range(len(acc) - 1))
        assert report["accuracy"][0] == 1.0
        assert report["buckets"]

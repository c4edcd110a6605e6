import copy
import json
import tempfile
import unittest
from math import inf, isfinite, isnan, log, nan, pi, sqrt
from pathlib import Path

import pandas as pd

from hherz.data_structures import CheckResult
from hherz.errors import HypothesisError, ScenarioError
from hherz.harness import (
    Report,
    Scenario,
    compare_baseline,
    inequality_ratio,
    load_baselines,
    load_scenario,
    recompute_ratio,
    report_frame,
    run_axioms,
    run_batch,
    run_calibration,
    run_constants,
    run_inequality,
    run_norms,
    save_baselines,
    write_reports,
)
from hherz.harness.cli import EXIT_INVALID, EXIT_OK, main
from hherz.hausdorff import TheoremKind
from hherz.quadrature import QuadMethod

ROOT = Path(__file__).parent.parent

SCENARIO = {
    "name": "small_thm2",
    "n": 1,
    "kernel": {"kind": "char_shell", "r1": 1, "r2": 2},
    "matrix_field": {"kind": "inverse_dilation"},
    "symbol_b": {"kind": "log_norm"},
    "f": {"kind": "char_annulus", "k1": 0, "k2": 1},
    "weight": {"kind": "power", "beta": 0.5},
    "theorem": {"which": "thm2", "p": 2, "q": 4, "q1": 2, "q2": 4 / 3, "alpha1": 0, "alpha2": -1},
    "quad": {"method": "stratified_monte_carlo", "budget": 4000, "seed": 7},
    "herz_window": [-2, 3],
    "cbmo_grid": [-1, 1],
}


def scenario(**changes) -> Scenario:
    literal = copy.deepcopy(SCENARIO)
    literal.update(changes)
    return Scenario.from_literal(literal)


class TestScenario(unittest.TestCase):
    def test_parse(self):
        s = scenario()
        self.assertEqual(s.name, "small_thm2")
        self.assertIs(s.theorem.which, TheoremKind.THM2)
        self.assertIs(s.quad.method, QuadMethod.STRATIFIED_MONTE_CARLO)
        self.assertEqual(s.herz_window, (-2, 3))
        self.assertEqual(s.theorem.weight.beta, 0.5)

    def test_rejects_malformed_documents(self):
        missing = copy.deepcopy(SCENARIO)
        del missing["kernel"]
        for literal in (
            missing,
            dict(SCENARIO, extra=1),
            dict(SCENARIO, n=0),
            dict(SCENARIO, n=1.5),
            dict(SCENARIO, kernel={"kind": "char_shell", "r1": 2, "r2": 1}),
            dict(SCENARIO, theorem=dict(SCENARIO["theorem"], which="thm3")),
            dict(SCENARIO, theorem=dict(SCENARIO["theorem"], gamma=1)),
            dict(SCENARIO, quad={"budget": -1}),
            dict(SCENARIO, herz_window=[3, -2]),
            dict(SCENARIO, outer_budget=0),
            [SCENARIO],
        ):
            with self.assertRaises(ScenarioError):
                Scenario.from_literal(literal)

    def test_load(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "scenario.json"
            path.write_text(json.dumps(SCENARIO))
            self.assertEqual(load_scenario(path).name, "small_thm2")

            path.write_text("{not json")
            with self.assertRaises(ScenarioError):
                load_scenario(path)
            with self.assertRaises(ScenarioError):
                load_scenario(Path(directory) / "missing.json")

    def test_shipped_scenarios(self):
        for path in sorted((ROOT / "scenarios").glob("*.json")):
            with self.subTest(path=path.name):
                self.assertEqual(load_scenario(path).theorem.which.value, path.stem)

    def test_shipped_baselines(self):
        baselines = load_baselines(ROOT / "baselines.json")
        for path in sorted((ROOT / "scenarios").glob("*.json")):
            with self.subTest(path=path.name):
                entry = baselines[load_scenario(path).digest()]
                self.assertEqual(entry["name"], path.stem)
                self.assertGreater(entry["ratio"], 0.0)

    def test_digest(self):
        base = scenario().digest()
        self.assertEqual(scenario(name="renamed").digest(), base)
        self.assertEqual(scenario().with_overrides(seed=11, budget=500).digest(), base)
        self.assertNotEqual(scenario(f={"kind": "char_ball", "k": 0}).digest(), base)
        self.assertEqual(len(base), 64)

    def test_overrides(self):
        s = scenario().with_overrides(seed=3, budget=900)
        self.assertEqual((s.quad.seed, s.quad.budget), (3, 900))
        self.assertEqual(scenario().with_overrides(n=2).theorem.Q, 6)

    def test_nested_budgets(self):
        self.assertEqual(scenario().nested_budgets(), (63, 63))
        self.assertEqual(scenario(outer_budget=10).nested_budgets(), (10, 400))


class TestReport(unittest.TestCase):
    def test_ratio_rules(self):
        rhs, ratio, status = inequality_ratio(0.0, 0.0, 1.0, 1.0)
        self.assertTrue(isnan(ratio))
        self.assertEqual(status, "degenerate")
        self.assertEqual(inequality_ratio(1.0, 2.0, 1.0, 0.0)[2], "degenerate")
        self.assertEqual(inequality_ratio(0.0, 2.0, 0.0, 1.0)[1:], (0.0, "ok"))
        self.assertEqual(inequality_ratio(1.0, 2.0, 0.0, 1.0)[1], inf)
        self.assertEqual(inequality_ratio(2.0, 2.0, 1.0, 4.0), (8.0, 0.25, "ok"))

    def test_recompute(self):
        quantities = {"lhs": 3.0, "k_constant": 2.0, "b_cbmo": 0.5, "f_herz": 6.0}
        self.assertEqual(recompute_ratio(quantities), 0.5)

    def test_json_form(self):
        report = Report("r", (CheckResult("c", True, 0.0, 1.0),), {"ratio": nan, "rhs": inf})
        document = report.to_dict()
        self.assertIsNone(document["quantities"]["ratio"])
        self.assertIsNone(document["quantities"]["rhs"])
        self.assertTrue(document["passed"])
        json.dumps(document, allow_nan=False)

    def test_write(self):
        reports = [
            Report("a", (CheckResult("c1", True, 0.0, 1.0), CheckResult("c2", False, 2.0, 1.0)), {"ratio": 0.5}),
            Report("b", (), {"ratio": 0.25}),
        ]
        frame = report_frame(reports)
        self.assertEqual(len(frame), 3)
        self.assertEqual(list(frame["report"]), ["a", "a", "b"])

        with tempfile.TemporaryDirectory() as directory:
            csv_path = Path(directory) / "out.csv"
            write_reports(reports, csv_path, "csv")
            self.assertEqual(len(pd.read_csv(csv_path)), 3)

            json_path = Path(directory) / "out.json"
            write_reports(reports[:1], json_path, "json")
            self.assertEqual(json.loads(json_path.read_text())["name"], "a")

            with self.assertRaises(ValueError):
                write_reports(reports, json_path, "xml")

    def test_baselines(self):
        baselines = {}
        report = Report("r", quantities={"ratio": 0.5}, digest="abc")
        self.assertEqual(compare_baseline(report, baselines).detail, "pinned")
        self.assertEqual(baselines["abc"]["ratio"], 0.5)

        self.assertTrue(compare_baseline(report._replace(quantities={"ratio": 0.51}), baselines).passed)
        self.assertFalse(compare_baseline(report._replace(quantities={"ratio": 0.6}), baselines).passed)

        degenerate = Report("d", quantities={"ratio": nan}, digest="def")
        self.assertTrue(compare_baseline(degenerate, baselines).passed)
        self.assertNotIn("def", baselines)

        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "baselines.json"
            self.assertEqual(load_baselines(path), {})
            save_baselines(path, baselines)
            self.assertEqual(load_baselines(path), baselines)


class TestPipelines(unittest.TestCase):
    def test_axioms(self):
        report = run_axioms(1, samples=2000, seed=4)
        self.assertTrue(report.passed, [c for c in report.checks if not c.passed])
        self.assertEqual(run_axioms(1, samples=2000, seed=4).checks, report.checks)

    def test_calibration(self):
        report = run_calibration()
        self.assertTrue(report.passed, [c for c in report.checks if not c.passed])

    def test_norms_and_constants(self):
        norms = run_norms(scenario())
        self.assertTrue(norms.passed)
        self.assertGreater(norms.quantities["f_herz"], 0.0)
        self.assertGreater(norms.quantities["b_cbmo"], 0.0)

        constants = run_constants(scenario())
        self.assertIn("k_radial", constants.quantities)
        self.assertGreater(constants.quantities["k_constant"], 0.0)

    def test_inequality(self):
        s = scenario()
        baselines = {}
        report = run_inequality(s, baselines, invariance=True)
        self.assertTrue(report.passed, [c for c in report.checks if not c.passed])
        self.assertEqual(report.digest, s.digest())

        names = [check.name for check in report.checks]
        self.assertEqual(names, ["hypotheses", "ratio_finite", "homogeneity_in_f", "shift_invariance_in_b", "baseline"])
        self.assertEqual(recompute_ratio(report.quantities), report.quantities["ratio"])
        self.assertIn(s.digest(), baselines)

        again = run_inequality(s, baselines)
        self.assertEqual(again.quantities["ratio"], report.quantities["ratio"])
        self.assertEqual(again.checks[-1].residual, 0.0)

    def test_shipped_scenarios_at_small_budget(self):
        expected = {
            "thm1_case_i": ("i", 4 * pi**2 * (3 * log(2) - 1)),
            "thm1_case_ii": ("ii", 4 * pi**2 * (4 * sqrt(2) * (1 - log(2)) - 8 + 12 * log(2))),
            "thm2": ("thm2", 74.24602044),
        }
        for path in sorted((ROOT / "scenarios").glob("*.json")):
            with self.subTest(path=path.name):
                report = run_inequality(load_scenario(path).with_overrides(budget=2000), invariance=True)
                self.assertTrue(report.passed, [c for c in report.checks if not c.passed])
                self.assertTrue(isfinite(report.quantities["ratio"]))

                case, K = expected[path.stem]
                self.assertEqual(report.diagnostics["case"], case)
                self.assertAlmostEqual(report.quantities["k_constant"] / K, 1.0, delta=0.1)
                self.assertIn("b_cbmo_err_est", report.diagnostics)

    def test_baseline_survives_budget_and_seed_changes(self):
        shipped = load_scenario(ROOT / "scenarios" / "thm1_case_i.json")
        s = Scenario.from_literal(dict(shipped.literal, quad={"method": "radial_1d", "budget": 20_000, "seed": 7}))
        self.assertEqual(s.digest(), shipped.digest())

        baselines = {}
        report = run_inequality(s, baselines)
        self.assertEqual(report.checks[-1].detail, "pinned")
        pinned = baselines[s.digest()]["ratio"]
        closed_form = load_baselines(ROOT / "baselines.json")[s.digest()]["ratio"]
        self.assertAlmostEqual(pinned / closed_form, 1.0, delta=1e-4)

        for rerun in (s.with_overrides(budget=40_000), s.with_overrides(seed=8)):
            check = run_inequality(rerun, baselines).checks[-1]
            self.assertEqual(check.name, "baseline")
            self.assertTrue(check.passed, check)

    def test_vanishing_kernel_is_degenerate(self):
        report = run_inequality(scenario(kernel={"kind": "char_shell", "r1": 1, "r2": 2, "coef": 0}))
        self.assertEqual(report.status, "degenerate")
        self.assertTrue(isnan(report.quantities["ratio"]))
        self.assertTrue(report.passed)

    def test_constant_symbol(self):
        report = run_inequality(scenario(symbol_b={"kind": "constant", "c": 1.0}))
        self.assertEqual(report.quantities["lhs"], 0.0)
        self.assertEqual(report.quantities["b_cbmo"], 0.0)
        self.assertEqual(report.quantities["ratio"], 0.0)

    def test_violated_hypotheses(self):
        bad = scenario(theorem=dict(SCENARIO["theorem"], q2=1.5))
        with self.assertRaises(HypothesisError):
            run_inequality(bad)

        reports = run_batch([bad, scenario()])
        self.assertEqual(reports[0].status, "rejected")
        self.assertFalse(reports[0].passed)
        self.assertNotEqual(reports[1].status, "rejected")


class TestCli(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)
        self.good = self.root / "good.json"
        self.good.write_text(json.dumps(SCENARIO))
        self.bad = self.root / "bad.json"
        self.bad.write_text(json.dumps(dict(SCENARIO, theorem=dict(SCENARIO["theorem"], alpha2=0))))

    def tearDown(self):
        self.directory.cleanup()

    def test_inequality(self):
        out = self.root / "report.json"
        baselines = self.root / "baselines.json"
        argv = ["inequality", "--scenario", str(self.good), "--baselines", str(baselines), "--out", str(out)]
        self.assertEqual(main(argv), EXIT_OK)
        self.assertTrue(json.loads(out.read_text())["passed"])
        self.assertEqual(len(json.loads(baselines.read_text())), 1)

    def test_invalid_inputs(self):
        malformed = self.root / "malformed.json"
        malformed.write_text("[]")
        out = str(self.root / "out.json")
        self.assertEqual(main(["constants", "--scenario", str(malformed), "--out", out]), EXIT_INVALID)
        self.assertEqual(main(["inequality", "--scenario", str(self.bad), "--out", out]), EXIT_INVALID)
        self.assertEqual(main(["report", "--scenario", str(self.bad), str(self.good), "--out", out]), EXIT_INVALID)

    def test_overrides_and_csv(self):
        out = self.root / "norms.csv"
        argv = ["norms", "--scenario", str(self.good), "--seed", "1", "--budget", "2000", "--format", "csv", "--out", str(out)]
        self.assertEqual(main(argv), EXIT_OK)
        self.assertEqual(pd.read_csv(out)["report"].iloc[0], "small_thm2")

    def test_bad_arguments(self):
        with self.assertRaises(SystemExit):
            main(["axioms", "--seed", "-1"])
        with self.assertRaises(SystemExit):
            main(["norms"])


if __name__ == "__main__":
    unittest.main()

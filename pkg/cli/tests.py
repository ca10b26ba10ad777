import json
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from sequences.schedule import TABLE1_SEQUENCES

from .config import parse_angle, parse_values, round_numbers
from .management.commands.classify import Command as ClassifyCommand

HOPELESS = {**settings.REFOCUS, "ANNEAL_SWEEPS": 1, "DESCENT_ITERATIONS": 0, "POLISH_EVALUATIONS": 1}


def run(*args, **options):
    out = StringIO()
    call_command(*args, stdout=out, stderr=StringIO(), **options)
    return out.getvalue()


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)


class ConfigHelperTests(SimpleTestCase):

    def test_angles(self):
        self.assertAlmostEqual(parse_angle("pi"), 3.141592653589793)
        self.assertAlmostEqual(parse_angle("2pi"), 2 * 3.141592653589793)
        self.assertAlmostEqual(parse_angle("pi/2"), 3.141592653589793 / 2)
        self.assertAlmostEqual(parse_angle("1.5"), 1.5)
        with self.assertRaises(CommandError):
            parse_angle("half")

    def test_values(self):
        values = parse_values("0.01:0.1:3")
        self.assertEqual(len(values), 3)
        self.assertAlmostEqual(values[1], 0.01 * 10 ** 0.5)
        self.assertEqual(parse_values("0.1,0.2"), [0.1, 0.2])

    def test_twelve_digits(self):
        self.assertEqual(round_numbers({"a": [1 / 3]}), {"a": [0.333333333333]})


class VerifyCommandTests(CommandTestCase):

    def test_q1_certifies(self):
        report = json.loads(run("verify", shape="Q1", model="ising"))
        self.assertTrue(report["passed"])
        for k in ("1", "2"):
            self.assertLess(max(report["residuals"][k].values()), 1e-6)

    def test_gaussian_fails_with_report(self):
        path = self.dir / "gauss.json"
        with self.assertRaises(CommandError) as ctx:
            run("verify", shape="gauss", output=str(path))
        self.assertEqual(ctx.exception.returncode, 2)
        report = json.loads(path.read_text())
        self.assertGreater(max(report["residuals"]["1"].values()), 1e-3)

    def test_zero_coupling(self):
        report = json.loads(run("verify", shape="S1", model="none"))
        self.assertTrue(report["passed"])
        self.assertLess(max(report["residuals"]["1"].values()), 1e-12)

    def test_unknown_shape_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            run("verify", shape="square")
        self.assertEqual(ctx.exception.returncode, 1)


class ClassifyCommandTests(CommandTestCase):

    def test_xxz_two_pulses(self):
        report = json.loads(run("classify", sequence="X1 X1", shape="Q1", model="xxz"))
        self.assertEqual(report["order"], 0)
        self.assertIn("perp", report["attribution"]["1"])

    def test_idle(self):
        report = json.loads(run("classify", sequence="I", shape="S1", model="ising"))
        self.assertEqual(report["order"], 0)

    def test_parse_error(self):
        with self.assertRaises(CommandError) as ctx:
            run("classify", sequence="X1 Q2", shape="S1")
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("position 3", str(ctx.exception))

    def test_k_max_limit(self):
        with self.assertRaises(CommandError) as ctx:
            run("classify", sequence="X1", shape="S1", k_max=10)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_bad_flag_exits_one(self):
        command = ClassifyCommand(stdout=StringIO(), stderr=StringIO())
        with self.assertRaises(SystemExit) as ctx:
            command.run_from_argv(["manage.py", "classify", "--k-max", "many"])
        self.assertEqual(ctx.exception.code, 1)

    def test_config_file_and_flag_precedence(self):
        path = self.dir / "run.json"
        path.write_text(json.dumps({"sequence": "X1", "shape": "gauss", "no-attribution": True}))
        report = json.loads(run("classify", config=str(path), shape="S1"))
        self.assertEqual(report["shape"], "S1")
        self.assertEqual(report["order"], 1)
        self.assertEqual(report["attribution"], {})

    def test_output_file_is_deterministic(self):
        first, second = self.dir / "a.json", self.dir / "b.json"
        self.assertEqual(run("classify", sequence="X1", shape="S1", output=str(first)), "")
        run("classify", sequence="X1", shape="S1", output=str(second))
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertEqual(sorted(p.name for p in self.dir.iterdir()), ["a.json", "b.json"])


class SearchCommandTests(CommandTestCase):

    def test_single_pulse(self):
        report = json.loads(run("search", length=1, alphabet="X1", shape="Q1"))
        self.assertEqual(report["order"], 2)
        self.assertEqual([s["sequence"] for s in report["sequences"]], ["X1"])

    def test_budget(self):
        with self.assertRaises(CommandError) as ctx:
            run("search", length=9, shape="Q1")
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn(str(8 ** 9), str(ctx.exception))


class Table1CommandTests(CommandTestCase):

    def test_subset(self):
        lines = run("table1", shapes=["S1"], models=["ising"], ids=[1, 2]).splitlines()
        self.assertEqual(lines[0], "shape,sequence_id,model,order,asterisk,width_sensitive,expected,match")
        self.assertEqual(lines[1:], ["S1,1,ising,1,0,0,1,1", "S1,2,ising,1,0,0,1,1"])

    def test_asterisk_cell(self):
        lines = run("table1", shapes=["gauss"], models=["bath"], ids=[2]).splitlines()
        shape, sid, model, order, asterisk, _, expected, match = lines[1].split(",")
        self.assertEqual((order, asterisk, expected, match), ("1", "1", "1*", "1"))


class DesignCommandTests(CommandTestCase):

    @override_settings(REFOCUS=HOPELESS)
    def test_no_convergence_writes_best_so_far(self):
        path = self.dir / "pulse.json"
        with self.assertRaises(CommandError) as ctx:
            run("design", angle="pi", K=2, L=1, M=4, seed=1, steps=200, output=str(path))
        self.assertEqual(ctx.exception.returncode, 2)
        pulse = json.loads(path.read_text())
        self.assertEqual(pulse["angle_over_pi"], 1.0)
        self.assertEqual(pulse["K"], 2)
        log = (self.dir / "pulse.log.csv").read_text().splitlines()
        self.assertEqual(log[0], "iteration,temperature,objective")

    def test_infeasible_goal(self):
        with self.assertRaises(CommandError) as ctx:
            run("design", K=3, L=1, M=3)
        self.assertEqual(ctx.exception.returncode, 1)


class SweepCommandTests(CommandTestCase):

    def slope(self, stdout):
        return float(stdout.split()[-1])

    def test_bb1_cubic(self):
        path = self.dir / "bb1.csv"
        stdout = run("sweep", experiment="bb1", eps="0.01:0.1:5", output=str(path))
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "epsilon,error")
        self.assertEqual(len(lines), 6)
        self.assertAlmostEqual(self.slope(stdout), 3.0, delta=0.4)

    def test_scaling(self):
        path = self.dir / "scaling.csv"
        stdout = run(
            "sweep", experiment="scaling", sequence=TABLE1_SEQUENCES[4], shape="S1",
            k_max=3, jz_values="0.05:0.4:5", output=str(path),
        )
        self.assertEqual(path.read_text().splitlines()[0], "j_tau,error")
        self.assertAlmostEqual(self.slope(stdout), 4.0, delta=0.5)

    def test_missing_experiment(self):
        with self.assertRaises(CommandError) as ctx:
            run("sweep")
        self.assertEqual(ctx.exception.returncode, 1)

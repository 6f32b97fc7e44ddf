import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose

from cpdilate import definitions
from cpdilate.certificate import Certificate
from cpdilate.cli import main
from cpdilate.instance import Instance
from cpdilate.unit_tests.test_instance import transpose_instance
from cpdilate.utils import complex_from_json, complex_to_json


class TestCommandLine(unittest.TestCase):

    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.directory = directory.name

    def path(self, name: str) -> str:
        return os.path.join(self.directory, name)

    def run_main(self, *argv: str) -> int:
        with redirect_stderr(io.StringIO()):
            return main(list(argv))

    def gen(self, name: str = "instance.json", *extra: str) -> str:
        path = self.path(name)
        self.assertEqual(self.run_main("gen", "--seed", "0", "--algebra", "M2", "--n", "2", "--mult", "2",
                                       "--out", path, *extra), 0)
        return path

    def test_gen(self):
        path = self.gen()
        with open(path) as instance_file:
            text = instance_file.read()
        self.assertTrue(text.endswith("}\n"))
        instance = Instance.from_string(text)
        self.assertEqual(instance.source.flag_dims, (2,))
        self.assertEqual(instance.target.flag_dims, (2,))
        self.assertEqual(instance.format() + "\n", text)

        self.assertEqual(self.run_main("gen", "--algebra", "M1+M2", "--chain", "0/0,1", "--n", "2", "--seed", "1",
                                       "--out", self.path("levels.json")), 0)
        instance = Instance.from_file(self.path("levels.json"))
        self.assertEqual(instance.source.flag_dims, (1, 3))
        self.assertEqual(instance.target.flag_dims, (1, 3))
        self.assertEqual(instance.algebra.num_levels, 2)

        self.assertEqual(self.run_main("gen", "--tol-res", "1e-6", "--out", self.path("tol.json")), 0)
        self.assertEqual(Instance.from_file(self.path("tol.json")).tolerances.residual_tol, 1e-6)

    def test_dilate_and_verify(self):
        instance_path = self.gen()
        cert_path = self.path("dilate.cert.json")
        self.assertEqual(self.run_main("dilate", "--in", instance_path, "--out", cert_path), 0)
        cert = Certificate.from_file(cert_path)
        self.assertLessEqual(cert.residuals['res1'], 1e-8)
        self.assertLessEqual(cert.residuals['res2'], 1e-8)
        self.assertNotIn('duration', json.loads(open(cert_path).read()))

        report_path = self.path("report.txt")
        self.assertEqual(self.run_main("verify", cert_path, "--out", report_path), 0)
        with open(report_path) as report:
            self.assertEqual(report.read(), f"{cert_path}: OK\n")

        # editing a residual breaks verification
        data = json.loads(open(cert_path).read())
        data['residuals']['res1'] = 0.5
        with open(cert_path, "w") as cert_file:
            json.dump(data, cert_file)
        self.assertEqual(self.run_main("verify", cert_path, "--out", report_path), 1)
        with open(report_path) as report:
            self.assertTrue(report.read().startswith(f"{cert_path}: FAILED"))

    def test_repeatable(self):
        instance_path = self.gen("half.json", "--second", "half")
        for name in ("first.json", "second.json"):
            self.assertEqual(self.run_main("rn", "--in", instance_path, "--out", self.path(name)), 0)
        with open(self.path("first.json"), "rb") as first, open(self.path("second.json"), "rb") as second:
            self.assertEqual(first.read(), second.read())

        cert = Certificate.from_file(self.path("first.json"))
        delta1 = complex_from_json(cert.operators['Delta1'])
        assert_allclose(delta1, np.eye(len(delta1)) / 2, atol=1e-8)

        data = json.loads(open(self.path("first.json")).read())
        data['operators']['Delta1'] = complex_to_json(np.zeros_like(delta1))
        data['operators']['Delta2'] = complex_to_json(np.zeros_like(complex_from_json(data['operators']['Delta2'])))
        with open(self.path("zeroed.json"), "w") as cert_file:
            json.dump(data, cert_file)
        self.assertEqual(self.run_main("verify", self.path("zeroed.json"), "--out", self.path("report.txt")), 1)

    def test_failing_verdicts(self):
        path = self.path("transpose.json")
        transpose_instance().write_to_file(path)
        cert_path = self.path("transpose.cert.json")
        self.assertEqual(self.run_main("check-cp", "--in", path, "--out", cert_path), 1)
        cert = Certificate.from_file(cert_path)
        self.assertEqual(cert.verdicts['cp'], 'NOT_CP')
        self.assertAlmostEqual(cert.residuals['choi_min_eigenvalue'], -1)
        self.assertEqual(self.run_main("verify", cert_path, "--out", self.path("report.txt")), 0)

        scaled = self.gen("scaled.json", "--second", "scaled")
        self.assertEqual(self.run_main("equiv", "--in", scaled, "--out", self.path("equiv.json")), 1)
        rotated = self.gen("rotated.json", "--second", "rotated")
        self.assertEqual(self.run_main("equiv", "--in", rotated, "--out", self.path("equiv.json")), 0)

    def test_input_errors(self):
        path = self.path("broken.json")
        with open(path, "w") as broken:
            broken.write('{"version": "cpdilate/1", "n": 0}')
        self.assertEqual(self.run_main("dilate", "--in", path, "--out", self.path("out.json")), 2)
        self.assertFalse(os.path.exists(self.path("out.json")))

        instance_path = self.gen()
        self.assertEqual(self.run_main("rn", "--in", instance_path, "--out", self.path("out.json")), 2)
        self.assertEqual(self.run_main("dilate", "--in", instance_path, "--tol-res", "0.5"), 2)
        self.assertEqual(self.run_main("dilate", "--in", self.path("missing.json")), 2)
        self.assertEqual(self.run_main("verify"), 2)
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                main(["explode"])

    def test_tolerance_environment(self):
        instance_path = self.gen()
        out = self.path("out.json")
        with mock.patch.dict(os.environ, {definitions.TOLERANCE_ENV_VAR: "1e-6"}):
            self.assertEqual(self.run_main("dilate", "--in", instance_path, "--out", out), 0)
            self.assertEqual(Certificate.from_file(out).details['tolerances']['residual_tol'], 1e-6)
            self.assertEqual(self.run_main("dilate", "--in", instance_path, "--out", out, "--tol-res", "1e-5"), 0)
            self.assertEqual(Certificate.from_file(out).details['tolerances']['residual_tol'], 1e-5)

    def test_text_and_timing(self):
        instance_path = self.gen()
        out = self.path("report.txt")
        self.assertEqual(self.run_main("commutant", "--in", instance_path, "--out", out, "--format", "text"), 0)
        with open(out) as report:
            text = report.read()
        self.assertIn("verdicts:", text)
        self.assertIn("residuals:", text)

        out = self.path("timed.json")
        self.assertEqual(self.run_main("dilate", "--in", instance_path, "--out", out, "--timing"), 0)
        self.assertIn('duration', json.loads(open(out).read()))

    def test_batch(self):
        instances = os.path.join(self.directory, "instances")
        reports = os.path.join(self.directory, "reports")
        os.makedirs(instances)
        for seed in ("1", "2"):
            self.assertEqual(self.run_main("gen", "--seed", seed, "--n", "2", "--mult", "2",
                                           "--out", os.path.join(instances, f"seed{seed}.json")), 0)
        self.assertEqual(self.run_main("dilate", "--in", instances, "--out", reports, "--workers", "2"), 0)
        self.assertEqual(sorted(os.listdir(reports)), ["seed1.dilate.json", "seed2.dilate.json"])

        listing = self.path("listing.txt")
        self.assertEqual(self.run_main("verify", reports, "--out", listing), 0)
        with open(listing) as report:
            self.assertEqual(report.read().count(": OK"), 2)


if __name__ == '__main__':
    unittest.main()

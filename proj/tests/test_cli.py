"""End-to-end checks of the sands command line tool.

usage: test_cli.py <sands binary> <project root>
"""

import csv
import json
import math
import os
import random
import subprocess
import sys
import tempfile
import unittest

import jsonschema

BIN = sys.argv[1] if len(sys.argv) > 1 else "build/tools/sands"
ROOT = sys.argv[2] if len(sys.argv) > 2 else "."
del sys.argv[1:]

IRIS = os.path.join(ROOT, "data", "iris.csv")
SCHEMAS = os.path.join(ROOT, "schemas")


def schema(name):
    with open(os.path.join(SCHEMAS, name + ".schema.json")) as f:
        return json.load(f)


def run(*args, expect=0):
    p = subprocess.run([BIN, *args], capture_output=True, text=True)
    if p.returncode != expect:
        raise AssertionError(f"{args}: exit {p.returncode}, wanted {expect}\n{p.stderr}")
    return json.loads(p.stdout) if p.returncode == 0 else p


def write_csv(path, rows, header):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def blobs(centers, sigma, n, seed):
    rng = random.Random(seed)
    rows = []
    for k, c in enumerate(centers):
        for _ in range(n):
            rows.append([c[0] + rng.gauss(0, sigma), c[1] + rng.gauss(0, sigma), f"c{k}"])
    return rows


def rings(n, seed):
    rng = random.Random(seed)
    rows = []
    for r, name in ((1.0, "inner"), (3.0, "outer")):
        for _ in range(n):
            t = rng.uniform(0, 2 * math.pi)
            rr = r + rng.gauss(0, 0.1)
            rows.append([rr * math.cos(t), rr * math.sin(t), name])
    return rows


# directional S&S of two classes, sample spreads along the center line
def pair_db(a, b, alpha=6.0):
    ma = [sum(c) / len(a) for c in zip(*a)]
    mb = [sum(c) / len(b) for c in zip(*b)]
    d = math.dist(ma, mb)
    u = [(y - x) / d for x, y in zip(ma, mb)]

    def sd(rows):
        p = [sum(v * w for v, w in zip(r, u)) for r in rows]
        m = sum(p) / len(p)
        return math.sqrt(sum((q - m) ** 2 for q in p) / (len(p) - 1))

    sa, sb = sd(a), sd(b)
    sigma = math.sqrt((len(a) * sa * sa + len(b) * sb * sb) / (len(a) + len(b)))
    return 20 * math.log10(d / (alpha * sigma))


def strip_timings(j):
    if isinstance(j, dict):
        return {k: strip_timings(v) for k, v in j.items() if k not in ("timings", "seconds")}
    if isinstance(j, list):
        return [strip_timings(v) for v in j]
    return j


class Cli(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        t = cls.tmp.name
        cls.binary = os.path.join(t, "binary.csv")
        write_csv(cls.binary, blobs([(0, 0), (2, 0)], 0.2, 60, 1), ["x", "y", "label"])
        cls.three = os.path.join(t, "three.csv")
        write_csv(cls.three, blobs([(0, 0), (2, 0), (0, 2)], 0.2, 40, 2), ["x", "y", "label"])
        cls.rings = os.path.join(t, "rings.csv")
        write_csv(cls.rings, rings(150, 3), ["x", "y", "label"])
        cls.same = os.path.join(t, "same.csv")
        rows = blobs([(0, 0), (0, 0)], 1.0, 80, 4)
        write_csv(cls.same, rows, ["x", "y", "label"])
        cls.nan = os.path.join(t, "nan.csv")
        with open(cls.nan, "w") as f:
            f.write("x,y,label\n1,2,a\nnan,3,b\n4,5,a\n6,7,b\n")

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def out(self, name):
        return os.path.join(self.tmp.name, name)

    def check_manifest(self, out_dir):
        with open(os.path.join(out_dir, "manifest.json")) as f:
            m = json.load(f)
        jsonschema.validate(m, schema("manifest"))
        for p in m["outputs"]:
            self.assertTrue(os.path.exists(p), p)
        return m

    def test_analyze_iris(self):
        o = self.out("analyze_iris")
        j = run("analyze", IRIS, "--out", o)
        jsonschema.validate(j, schema("analyze"))
        self.check_manifest(o)
        self.assertEqual(len(j["pairs"]), 3)
        with open(IRIS) as f:
            r = list(csv.reader(f))[1:]
        by = {}
        for row in r:
            by.setdefault(row[-1], []).append([float(v) for v in row[:-1]])
        expect = {(p["name_a"], p["name_b"]): pair_db(by[p["name_a"]], by[p["name_b"]]) for p in j["pairs"]}
        for p in j["pairs"]:
            self.assertAlmostEqual(p["ratio_db"], expect[(p["name_a"], p["name_b"])], places=9)
        self.assertAlmostEqual(j["ratio_db"], min(expect.values()), places=9)
        self.assertEqual(j["verdict"], "KernelRequired")
        with open(os.path.join(o, "analyze.json")) as f:
            self.assertEqual(json.load(f), j)

    def test_analyze_rings_needs_a_kernel(self):
        j = run("analyze", self.rings, "--out", self.out("analyze_rings"))
        self.assertEqual(j["verdict"], "KernelRequired")
        self.assertIsNone(j["copt"]["c_opt"])

    def test_analyze_pooled_mode(self):
        j = run("analyze", self.binary, "--mode", "pooled", "--alpha", "6", "--out", self.out("pooled"))
        jsonschema.validate(j, schema("analyze"))
        self.assertEqual(j["min_pair"]["mode"], "pooled")

    def test_data_errors_exit_2(self):
        run("analyze", self.out("missing.csv"), "--out", self.out("e1"), expect=2)
        run("analyze", self.nan, "--out", self.out("e2"), expect=2)
        run("fit", self.out("missing.csv"), "--out", self.out("e3"), expect=2)

    def test_usage_error(self):
        p = subprocess.run([BIN, "analyze"], capture_output=True, text=True)
        self.assertNotEqual(p.returncode, 0)

    def fit(self, data, name, *extra):
        o = self.out(name)
        j = run("fit", data, "--out", o, *extra)
        jsonschema.validate(j, schema("fit"))
        self.check_manifest(o)
        with open(j["model"]) as f:
            jsonschema.validate(json.load(f), schema("model"))
        for p in j["model_files"]:
            with open(p) as f:
                jsonschema.validate(json.load(f), schema("pair_model"))
        return o, j

    def test_fit_binary_writes_one_model(self):
        _, j = self.fit(self.binary, "fit_binary")
        self.assertEqual(len(j["model_files"]), 1)
        self.assertEqual(j["svm_fits"], 1)
        self.assertEqual(j["mode"], "input_space")
        self.assertIsNone(j["kernel"])

    def test_fit_three_classes_writes_three_models(self):
        _, j = self.fit(self.three, "fit_three")
        self.assertEqual(len(j["model_files"]), 3)
        self.assertEqual(j["svm_fits"], 3)

    def test_fit_rings_attaches_a_map(self):
        o, j = self.fit(self.rings, "fit_rings")
        self.assertEqual(j["mode"], "kernel_space")
        self.assertIsNotNone(j["kernel"])
        with open(j["model"]) as f:
            m = json.load(f)
        self.assertIsNotNone(m["feature_map"])
        self.assertTrue(os.path.exists(os.path.join(o, "feature_map.json")))
        p = run("predict", j["model"], self.rings, "--out", self.out("pred_rings"))
        self.assertGreater(p["accuracy"], 0.9)

    def test_no_suitable_kernel_exit_3(self):
        grid = self.out("grid.json")
        with open(grid, "w") as f:
            json.dump({"candidates": [{"family": "rbf", "gamma": [0.1, 1.0]}]}, f)
        run("fit", self.same, "--grid", grid, "--out", self.out("nk"), expect=3)
        _, j = self.fit(self.same, "nk_best", "--grid", grid, "--no-kernel", "best")
        self.assertTrue(j["fallback"])

    def test_fit_is_deterministic(self):
        a, _ = self.fit(self.rings, "det_a", "--seed", "5")
        b, _ = self.fit(self.rings, "det_b", "--seed", "5")
        with open(os.path.join(a, "model.json")) as f, open(os.path.join(b, "model.json")) as g:
            self.assertEqual(f.read(), g.read())

    def test_predict(self):
        _, j = self.fit(self.three, "fit_pred")
        o = self.out("pred")
        p = run("predict", j["model"], self.three, "--out", o)
        jsonschema.validate(p, schema("predict"))
        self.check_manifest(o)
        self.assertEqual(p["n"], 120)
        self.assertGreater(p["accuracy"], 0.95)
        with open(p["predictions"]) as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], ["row", "predicted"])
        self.assertEqual(len(rows), 121)
        self.assertTrue({r[1] for r in rows[1:]} <= {"c0", "c1", "c2"})

    def cv(self, name, *extra):
        o = self.out(name)
        j = run("cv", IRIS, "--c-grid", "0.1,1,10", "--folds", "3", "--feature-dim", "64", "--out", o, *extra)
        jsonschema.validate(j, schema("cv"))
        self.check_manifest(o)
        with open(j["result"]) as f:
            full = json.load(f)
        jsonschema.validate(full, schema("cv_result"))
        return j, full

    def test_cv_counts_and_determinism(self):
        j, full = self.cv("cv_a", "--seed", "3")
        cells = len(full["table"])
        self.assertEqual(cells, len(full["candidates"]) * 3)
        self.assertEqual(j["combinations"], cells * 3)
        self.assertEqual(j["fit_count"], cells * 3 * 3)
        _, again = self.cv("cv_b", "--seed", "3")
        self.assertEqual(strip_timings(full), strip_timings(again))

    def test_cv_hinge_score(self):
        j, full = self.cv("cv_hinge", "--score", "hinge", "--no-kernels")
        self.assertEqual(j["score"], "hinge")
        self.assertEqual(len(full["candidates"]), 1)
        best = min(c["mean"] for c in full["table"])
        self.assertEqual(j["best"]["mean"], best)

    def test_fit_curve_sign_pattern(self):
        src = self.out("copt.csv")
        rows = []
        for i in range(14):
            s = 0.04 + 0.02 * i
            c = 0.7345 * math.exp(33.6915 * s) - 0.5247 if s < 1 / 6 else 5164.4657 * math.exp(-21.2514 * s) - 0.8548
            rows.append([s, 20 * math.log10(1 / (6 * s)), c, 0.1])
        write_csv(src, rows, ["sigma_over_d", "ratio_db", "c_opt", "min_test_hinge"])
        j = run("experiment", "fit-curve", src, "--out", self.out("fitc"))
        inc, dec = j["increasing"], j["decreasing"]
        self.assertGreater(inc["a"], 0)
        self.assertGreater(inc["b"], 0)
        self.assertLess(inc["c"], 0)
        self.assertGreater(dec["a"], 0)
        self.assertLess(dec["b"], 0)
        self.assertAlmostEqual(inc["b"] / 33.6915, 1, delta=0.05)
        self.assertAlmostEqual(dec["b"] / -21.2514, 1, delta=0.05)

    def test_copt_table_small(self):
        o = self.out("ctab")
        j = run("experiment", "copt-table", "--runs", "2", "--n", "60", "--sigmas", "0.1,0.2", "--out", o)
        self.check_manifest(o)
        self.assertEqual(len(j["table"]), 2)
        with open(os.path.join(o, "copt_table.csv")) as f:
            head = f.readline().strip()
        self.assertEqual(head, "sigma_over_d,ratio_db,c_opt,min_test_hinge")


if __name__ == "__main__":
    unittest.main(verbosity=2)

"""Acceptance suite: one test per release criterion, each printing a
[acceptance] PASS/FAIL line and enforcing its runtime budget.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from margin_forge import (
    ConfusionReport,
    EncoderState,
    FeatureVector,
    LinearKernel,
    RbfKernel,
    Record,
    Schema,
    SparseExample,
    SyntheticCohortSpec,
    TrainConfig,
    decision_value,
    decision_values,
    encode_record,
    generate_cohort,
    load_model,
    read_sparse,
    render_report,
    save_model,
    scalar_code,
    total_slack,
    train,
    write_sparse,
)
from margin_forge.cli import main
from margin_forge.encoding import Categorical, CategoricalMode, FieldSpec
from conftest import random_dataset
from dual_oracle import reference_decision_values

ROWS = (
    (1000, 212, 788, 1.0, 56, 32, 24),
    (1000, 212, 788, 2.0, 41, 23, 18),
    (1000, 409, 591, 1.0, 153, 37, 116),
    (4000, 1055, 2945, 1.0, 438, 168, 270),
)


@contextmanager
def criterion(name, budget_seconds):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL")
        raise
    elapsed = time.perf_counter() - start
    if elapsed > budget_seconds:
        print(f"[acceptance] {name}: FAIL (over budget: {elapsed:.1f}s > {budget_seconds}s)")
        raise AssertionError(
            f"{name} exceeded its runtime budget: {elapsed:.1f}s > {budget_seconds}s"
        )
    print(f"[acceptance] {name}: PASS ({elapsed:.1f}s)")


def test_report_fixture_suite():
    with criterion("report fixture suite", budget_seconds=1.0):
        reports = []
        for n, pos, neg, c, mis, ptn, ntp in ROWS:
            report = ConfusionReport(
                n_total=n, n_pos_labeled=pos, n_neg_labeled=neg, c_bound=c,
                misclassified=mis, postoneg=ptn, negtopos=ntp,
            )
            assert report.misclassified == report.postoneg + report.negtopos
            assert report.n_pos_labeled + report.n_neg_labeled == report.n_total
            reports.append(report)
        lines = render_report(reports).splitlines()
        assert lines[0] == (
            "Test | No of Patients | +1 labeled | -1 labeled | C(bound) | "
            "Misclassified | postoneg | negtopos"
        )
        expected_cells = [
            ["1", "1000", "212", "788", "1", "56", "32", "24"],
            ["2", "1000", "212", "788", "2", "41", "23", "18"],
            ["3", "1000", "409", "591", "1", "153", "37", "116"],
            ["4", "4000", "1055", "2945", "1", "438", "168", "270"],
        ]
        for line, cells in zip(lines[1:], expected_cells):
            assert [c.strip() for c in line.split("|")] == cells


def test_oracle_equivalence():
    with criterion("oracle equivalence (50 random datasets)", budget_seconds=30.0):
        rng = np.random.default_rng(424242)
        c_grid = (0.5, 1.0, 10.0)
        for trial in range(50):
            n = int(rng.integers(4, 13))
            d = int(rng.integers(1, 5))
            c = float(c_grid[trial % 3])
            kernel = (
                LinearKernel()
                if trial % 2 == 0
                else RbfKernel(gamma=float(rng.uniform(0.3, 2.0)))
            )
            data = random_dataset(rng, n, d)
            model, diag = train(
                data, TrainConfig(c_bound=c, kernel=kernel, kkt_tolerance=1e-6)
            )
            f_ref, alpha_ref, oracle = reference_decision_values(
                data, [x for x, _ in data], c, kernel
            )
            ref_objective = oracle.objective(alpha_ref)
            rel = abs(diag.dual_objective - ref_objective) / max(1.0, abs(ref_objective))
            assert rel <= 1e-4, f"trial {trial}: objective off by {rel:.2e}"
            f_ours = decision_values(model, [x for x, _ in data])
            worst = float(np.max(np.abs(f_ours - f_ref)))
            assert worst <= 1e-3, f"trial {trial}: decision values off by {worst:.2e}"


def test_kkt_property_suite():
    with criterion("KKT satisfaction (20 datasets, n <= 500)", budget_seconds=60.0):
        rng = np.random.default_rng(99)
        tol = 1e-3
        for trial in range(20):
            n = int(rng.integers(40, 501))
            d = int(rng.integers(2, 25))
            c = float((0.5, 1.0, 10.0)[trial % 3])
            kernel = RbfKernel(gamma=0.8) if trial % 4 == 3 else LinearKernel()
            if trial % 2 == 0:
                weights = tuple(rng.uniform(-1, 1, d))
                weights = weights if any(weights) else (1.0,) * d
                spec = SyntheticCohortSpec(
                    n=n, dim=d, planted_weights=weights,
                    planted_bias=float(rng.uniform(-0.5, 0.5)),
                    label_noise_rate=0.1, seed=int(rng.integers(1 << 31)),
                )
                data = generate_cohort(spec)
            else:
                data = random_dataset(rng, n, d)
            config = TrainConfig(c_bound=c, kernel=kernel, kkt_tolerance=tol)
            model, diag = train(data, config)
            alphas = np.array(diag.alphas)
            labels = np.array([y for _, y in data])
            assert ((alphas >= 0.0) & (alphas <= c)).all()
            assert abs(float((alphas * labels).sum())) <= 1e-6
            yf = labels * decision_values(model, [x for x, _ in data])
            satisfied = np.where(
                alphas == 0.0,
                yf >= 1.0 - tol,
                np.where(alphas == c, yf <= 1.0 + tol, np.abs(yf - 1.0) <= tol),
            )
            assert satisfied.all(), f"trial {trial}: KKT violated at {np.argmin(satisfied)}"


def test_c_sweep_slack_monotonicity():
    with criterion("C-sweep slack monotonicity", budget_seconds=60.0):
        spec = SyntheticCohortSpec(
            n=1000, dim=20, planted_weights=(1.0,) * 20, planted_bias=0.0,
            label_noise_rate=0.05, seed=11,
        )
        cohort = generate_cohort(spec)
        slacks = []
        for c in (0.5, 1.0, 2.0, 4.0, 8.0):
            model, _ = train(cohort, TrainConfig(c_bound=c))
            slacks.append(total_slack(model, cohort))
        for lower_c, higher_c in zip(slacks, slacks[1:]):
            assert higher_c <= lower_c + 1e-9, f"slack increased along the sweep: {slacks}"


def test_separable_pipeline(tmp_path):
    with criterion("separable pipeline (0 misclassified)", budget_seconds=10.0):
        cohort_path = tmp_path / "cohort.sparse"
        model_path = tmp_path / "model.txt"
        # An off-center plane keeps the classes separated well enough for
        # C=100 to drive training errors to zero, while still producing the
        # unbalanced label mix clinical cohorts show.
        assert main([
            "synth", "--n", "1000", "--dim", "20", "--noise", "0",
            "--bias", "-5", "--seed", "7", "-o", str(cohort_path),
        ]) == 0
        assert main([
            "train", str(cohort_path), "-c", "100", "-o", str(model_path),
        ]) == 0
        assert main(["evaluate", str(model_path), str(cohort_path), "-c", "100"]) == 0
        examples = read_sparse(cohort_path)
        assert len(examples) == 1000
        from margin_forge import evaluate, examples_to_dataset

        model = load_model(model_path)
        report = evaluate(model, examples_to_dataset(examples, dim=20), c_bound=100.0)
        assert report.misclassified == 0
        assert report.postoneg == 0 and report.negtopos == 0


def test_encoding_golden_values():
    with criterion("encoding golden values", budget_seconds=1.0):
        alphabet = ("A", "C", "G", "T")
        one_hot = Schema(
            fields=(FieldSpec(name="snp", kind=Categorical(alphabet=alphabet)),)
        )
        scalar = Schema(
            fields=(
                FieldSpec(
                    name="snp",
                    kind=Categorical(alphabet=alphabet, mode=CategoricalMode.SCALAR),
                ),
            )
        )
        state = EncoderState(stats={})
        blocks = {
            "A": (1.0, 0.0, 0.0, 0.0),
            "C": (0.0, 1.0, 0.0, 0.0),
            "G": (0.0, 0.0, 1.0, 0.0),
            "T": (0.0, 0.0, 0.0, 1.0),
        }
        codes = {"A": 0.2, "C": 0.4, "G": 0.6, "T": 0.8}
        for token in alphabet:
            vec = encode_record(one_hot, state, Record(values={"snp": token}))
            assert tuple(vec.to_dense()) == blocks[token]
            vec = encode_record(scalar, state, Record(values={"snp": token}))
            assert tuple(vec.to_dense()) == (codes[token],)
        assert [scalar_code(4, i) for i in (1, 2, 3, 4)] == [0.2, 0.4, 0.6, 0.8]


def test_format_round_trips(tmp_path):
    with criterion("format round-trips", budget_seconds=10.0):
        rng = np.random.default_rng(7)
        path = tmp_path / "case.sparse"
        for case in range(1000):
            examples = []
            for _ in range(int(rng.integers(0, 6))):
                n_entries = int(rng.integers(0, 7))
                indices = np.sort(
                    rng.choice(np.arange(1, 30), size=n_entries, replace=False)
                )
                entries = tuple(
                    (int(i), float(v))
                    for i, v in zip(indices, rng.normal(0, 10, n_entries))
                )
                examples.append(
                    SparseExample(label=int(rng.choice([1, -1])), entries=entries)
                )
            write_sparse(path, examples)
            assert read_sparse(path) == examples

        data = random_dataset(rng, 25, 4)
        for kernel in (LinearKernel(), RbfKernel(gamma=0.6)):
            model, _ = train(data, TrainConfig(c_bound=2.0, kernel=kernel))
            model_path = tmp_path / "model.txt"
            save_model(model_path, model)
            loaded = load_model(model_path)
            probes = [FeatureVector.dense(row) for row in rng.uniform(-2, 2, (100, 4))]
            before = decision_values(model, probes)
            after = decision_values(loaded, probes)
            assert np.array_equal(before, after), "decision values changed in transit"


PIPELINE_CSV_ROWS = 40


def _pipeline_csv(rng):
    lines = ["age,sex,snp_a,hist_mi,hist_stroke"]
    for k in range(PIPELINE_CSV_ROWS):
        age = int(rng.integers(35, 85))
        sex = "M" if rng.random() < 0.5 else "F"
        snp = "ACGT"[int(rng.integers(0, 4))]
        mi = "yes" if rng.random() < 0.3 else "no"
        stroke = "yes" if rng.random() < 0.2 else "no"
        lines.append(f"{age},{sex},{snp},{mi},{stroke}")
    return "\n".join(lines) + "\n"


def test_pipeline_determinism(tmp_path):
    with criterion("pipeline determinism (byte-identical artifacts)", budget_seconds=30.0):
        csv_path = tmp_path / "cohort.csv"
        csv_path.write_text(_pipeline_csv(np.random.default_rng(3)))
        schema_path = tmp_path / "schema.txt"
        schema_path.write_text(
            "age numeric\nsex categorical M,F\nsnp_a categorical A,C,G,T\n"
            "hist_mi binary yes\nhist_stroke binary yes\n"
        )
        artifacts = {}
        for run in ("one", "two"):
            sparse_path = tmp_path / f"cohort_{run}.sparse"
            model_path = tmp_path / f"model_{run}.txt"
            report_path = tmp_path / f"report_{run}.txt"
            assert main([
                "encode", str(csv_path), str(schema_path),
                "-o", str(sparse_path), "--label-rule", "hist_mi,hist_stroke",
            ]) == 0
            assert main([
                "train", str(sparse_path), "-c", "1", "--seed", "0",
                "-o", str(model_path),
            ]) == 0
            assert main([
                "evaluate", str(model_path), str(sparse_path), "-c", "1",
                "-o", str(report_path),
            ]) == 0
            artifacts[run] = (
                sparse_path.read_bytes(),
                model_path.read_bytes(),
                report_path.read_bytes(),
            )
        assert artifacts["one"][0] == artifacts["two"][0], "sparse files differ"
        assert artifacts["one"][1] == artifacts["two"][1], "model files differ"
        assert artifacts["one"][2] == artifacts["two"][2], "report files differ"

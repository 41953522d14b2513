import statistics

import numpy as np
import pytest

from cliquepart.bench import (
    GapReport,
    GapRow,
    SuiteSpec,
    export_tables,
    golden_instance,
    format_table,
    read_report,
    run_suite,
    verify_golden,
)
from cliquepart.environment import reset
from cliquepart.errors import DimensionError, SizeError
from cliquepart.neural import CriticParams, PolicyParams, save_checkpoint


def test_golden_passes():
    rep = verify_golden()
    assert rep.passed, rep.lines()
    assert [name for name, _, _ in rep.checks] == [
        "initial availability", "choose (2,3)", "(3,4) removed", "choose (1,3)", "(1,2) added", "terminal",
        "objective 74", "exact optimum 74"]


def test_golden_mutation_d24_near():
    inst = golden_instance(d24=50.0)
    rep = verify_golden(inst)
    # (2,4) becomes near too, so the four-edge start is already wrong
    assert not rep.passed and rep.failed_step == "initial availability"
    state = reset(inst)
    out = state.step((1, 2))
    assert out.removed_edges == () and (2, 3) in state.available_edges


def test_golden_mutation_d34_far():
    rep = verify_golden(golden_instance(d34=240.0))
    assert not rep.passed and rep.failed_step == "initial availability"


def test_fixture_methods_report_74():
    inst = golden_instance()
    rep = run_suite(["greedy", "exact"], SuiteSpec("cities", 4, 1), instances=[inst])
    assert [r.objective for r in rep.rows] == [74.0, 74.0]
    assert all(r.gap == 0.0 for r in rep.rows)


def test_suite_seeds_are_index_based():
    insts = SuiteSpec("general", 7, 3, seed_base=40).instances()
    again = SuiteSpec("general", 7, 1, seed_base=42).instances()
    assert insts[2] == again[0]


def test_aggregates_match_rows_and_gaps_non_negative():
    rep = run_suite(["random", "greedy", "exact"], SuiteSpec("general", 10, 20, seed_base=7))
    assert rep.label == "opt. gap"
    agg = rep.aggregates()
    for m in rep.methods:
        g = [r.gap for r in rep.rows if r.method == m]
        assert agg[m] == {"mean": float(np.mean(g)), "median": float(statistics.median(g)),
                          "min": min(g), "max": max(g)}
    assert all(r.gap >= -1e-9 for r in rep.rows)
    assert agg["exact"]["max"] == 0.0


def test_best_known_mode_labels_regret():
    rep = run_suite(["random", "greedy"], SuiteSpec("cities", 30, 5), reference_mode="best-known")
    assert rep.label == "regret vs best-known"
    assert "regret vs best-known" in format_table(rep)
    per_instance = {}
    for r in rep.rows:
        per_instance.setdefault(r.instance_id, []).append(r.gap)
    assert all(min(g) == 0.0 for g in per_instance.values())


def test_exact_reference_respects_cap():
    with pytest.raises(SizeError):
        run_suite(["random"], SuiteSpec("cities", 20, 2))
    with pytest.raises(SizeError):
        run_suite(["exact"], SuiteSpec("cities", 20, 2), reference_mode="best-known")


def test_checkpoint_method_checks_size(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "ck.json"
    save_checkpoint(path, PolicyParams.init(8, rng), CriticParams.init(9, rng=rng))
    with pytest.raises(DimensionError):
        run_suite([f"checkpoint:{path}"], SuiteSpec("cities", 10, 2))
    rep = run_suite([f"checkpoint:{path}", "random"], SuiteSpec("cities", 9, 4))
    assert rep.methods == [f"checkpoint:{path}", "random"]


def test_unknown_method_and_mode():
    with pytest.raises(ValueError):
        run_suite(["annealing"], SuiteSpec("cities", 6, 2))
    with pytest.raises(ValueError):
        run_suite(["random"], SuiteSpec("cities", 6, 2), reference_mode="oracle")


def test_export_and_reread(tmp_path):
    rep = run_suite(["random", "greedy"], SuiteSpec("cities", 12, 6))
    csv_path, txt_path = export_tables(rep, tmp_path / "table")
    back = read_report(csv_path)
    assert back.rows == rep.rows and back.reference_mode == "exact"
    assert txt_path.read_text() == format_table(rep)
    lines = format_table(rep).splitlines()
    assert [ln.split()[0] for ln in lines if ln[:1].isalpha()] == ["Mean", "Median", "Min", "Max"]


def test_empty_report_rejected(tmp_path):
    with pytest.raises(ValueError):
        format_table(GapReport([]))
    with pytest.raises(ValueError):
        export_tables(GapReport([]), tmp_path / "x")


def test_table_percentages():
    rows = [GapRow(0, "m", 110.0, 100.0, 0.1), GapRow(1, "m", 100.0, 100.0, 0.0)]
    text = format_table(GapReport(rows))
    assert "5.00%" in text and "10.00%" in text and "0.00%" in text

import csv
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parsimplex import reference
from parsimplex.bench import (
    CSV_COLUMNS,
    BenchCell,
    BenchReport,
    CacheModel,
    GridConfig,
    GridConfigError,
    SerialConvention,
    cache_limit_brute_force,
    cache_limit_constraints,
    cache_limit_note,
    emit_report,
    over_cache_limit,
    run_grid,
    tableau_bytes,
)
from parsimplex.generator import GenSpec, generate


class TestCacheModel:
    @pytest.mark.parametrize("b, expected", [(256, 2771), (512, 2651), (1024, 2429),
                                             (2048, 2048), (4096, 1499)])
    def test_published_values(self, b, expected):
        assert cache_limit_constraints(b) == expected
        assert cache_limit_note(b) is None

    def test_symmetric_case(self):
        assert cache_limit_constraints(0) == 2896

    def test_8192_deviates_from_published(self):
        assert cache_limit_constraints(8192) == 920
        note = cache_limit_note(8192)
        assert "920" in note and "1499" in note

    def test_closed_form_matches_float_formula(self):
        for b in (256, 4096, 8192, 99_999):
            cap = CacheModel().capacity
            assert cache_limit_constraints(b) == math.floor((-b + math.sqrt(b * b + 4 * cap)) / 2)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 100_000))
    def test_matches_brute_force(self, b):
        assert cache_limit_constraints(b) == cache_limit_brute_force(b)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 5000), st.integers(1, 1 << 24), st.sampled_from([4, 8]))
    def test_custom_models(self, b, cache, elem):
        model = CacheModel(cache, elem)
        assert cache_limit_constraints(b, model) == cache_limit_brute_force(b, model)
        assert cache_limit_note(256, model) is None

    def test_invalid(self):
        with pytest.raises(ValueError):
            CacheModel(0)
        with pytest.raises(ValueError):
            cache_limit_constraints(-1)

    def test_flag_and_exact_bytes(self):
        assert over_cache_limit(2772, 256)
        assert not over_cache_limit(2771, 256)
        assert tableau_bytes(2, 3) == 3 * 6 * 8


def make_cell(m, n, p, t, serial):
    s = serial / t
    return BenchCell(m, n, p, t, s, s / p, False)


class TestReport:
    def test_identities(self):
        report = BenchReport(serial_convention=SerialConvention.TWICE_T2)
        t2 = 0.036
        report.cells = [make_cell(256, 256, p, t, 2 * t2)
                        for p, t in [(2, t2), (4, 0.027), (8, 0.021)]]
        report.check_identities()
        assert report.cells[0].speedup == 2.0
        assert 2 * t2 == 0.072

    def test_efficiency_example(self):
        cell = BenchCell(1, 1, 16, 1.0, 8.0, 8.0 / 16, False)
        assert cell.efficiency == 0.5

    def test_empty_report_writes_header_only(self, tmp_path):
        paths = emit_report(BenchReport(), tmp_path)
        assert paths == [tmp_path / "report.csv"]
        rows = list(csv.reader(open(paths[0])))
        assert rows == [list(CSV_COLUMNS)]

    def test_single_cell(self, tmp_path):
        report = BenchReport(cells=[make_cell(4, 5, 2, 0.5, 1.0)])
        paths = emit_report(report, tmp_path)
        assert len(paths) == 2
        rows = list(csv.reader(open(paths[0])))
        assert rows[1] == ["4", "5", "2", "0.5", "2.0", "1.0", "0"]
        series = list(csv.reader(open(paths[1])))
        assert series == [["threads", "4x5"], ["2", "2.0"]]

    def test_grid_rows_and_series(self, tmp_path):
        cells = [make_cell(m, n, p, 1.0 / p, 1.0) for m, n in [(4, 5), (8, 5)] for p in (1, 2, 4)]
        paths = emit_report(BenchReport(cells=cells), tmp_path)
        rows = list(csv.reader(open(paths[0])))
        assert len(rows) == 1 + 6
        assert [p.name for p in paths[1:]] == ["speedup_m4.csv", "speedup_m8.csv"]
        eff = emit_report(BenchReport(cells=cells), tmp_path / "e", metric="efficiency")
        assert [p.name for p in eff[1:]] == ["efficiency_m4.csv", "efficiency_m8.csv"]

    def test_io_error_names_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError) as err:
            emit_report(BenchReport(), blocker / "sub")
        assert "file" in str(err.value)


class TestRunGrid:
    def test_twice_t2_needs_p2(self):
        with pytest.raises(GridConfigError):
            run_grid(GridConfig(sizes=[(4, 4)], thread_counts=[1], runs=1,
                                serial_convention=SerialConvention.TWICE_T2))

    @pytest.mark.parametrize("kwargs", [dict(runs=0), dict(thread_counts=[4, 2]), dict(thread_counts=[]),
                                        dict(instances=0), dict(warmup=-1)])
    def test_invalid(self, kwargs):
        args = dict(sizes=[(4, 4)], thread_counts=[1, 2], runs=1) | kwargs
        with pytest.raises(GridConfigError):
            GridConfig(**args).validate()

    def test_twice_t2(self, tmp_path):
        config = GridConfig(sizes=[(8, 8), (8, 12)], thread_counts=[1, 2, 3], runs=2, warmup=0,
                            density=0.9, seed=5, chunk_min=2)
        report = run_grid(config)
        report.check_identities()
        assert len(report.cells) == 6
        for cell in report.cells:
            assert cell.status == "Optimal"
            assert cell.efficiency == cell.speedup / cell.threads
            if cell.threads == 2:
                assert cell.speedup == 2.0
        paths = emit_report(report, tmp_path)
        assert len(list(csv.reader(open(paths[0])))) == 7

    def test_measured(self):
        config = GridConfig(sizes=[(6, 6)], thread_counts=[1, 2], runs=1, warmup=1,
                            serial_convention=SerialConvention.MEASURED, instances=2)
        report = run_grid(config)
        report.check_identities()
        assert report.serial_seconds[(6, 6)] > 0

    def test_iteration_limit_recorded_not_raised(self, beale):
        config = GridConfig(sizes=[(3, 4)], thread_counts=[2], runs=1, warmup=0, max_iterations=5)
        report = run_grid(config, problems={(3, 4): [beale]})
        assert report.cells[0].status == "IterationLimit"

    def test_failed_cell_does_not_abort(self, monkeypatch):
        import parsimplex.bench as bench_mod

        def broken(problem, config, team):
            raise RuntimeError("disk on fire")

        monkeypatch.setattr(bench_mod, "solve_parallel", broken)
        config = GridConfig(sizes=[(3, 3), (4, 4)], thread_counts=[1, 2], runs=1, warmup=0)
        report = run_grid(config)
        assert len(report.cells) == 4
        assert all(c.status.startswith("error") for c in report.cells)
        assert all(math.isnan(c.median_seconds) for c in report.cells)


def test_reference_table_shape():
    assert len(reference.MEDIAN_SECONDS) == 36
    assert reference.MEDIAN_SECONDS[(256, 256)][2] == 0.036
    s = reference.reference_speedups(256, 256)
    assert s[2] == 2.0

import json
import math

import numpy as np
import pandas as pd
import pytest

from core.errors import InvalidInput
from core.special_functions import IdentityReport
from utils.parallel_utils import parallel_map
from utils.path_manager import PathManager, atomic_write_json, atomic_write_text
from utils.report_utils import (
    REPORT_COLUMNS,
    consolidate,
    frame_reports,
    load_reports,
    reports_frame,
    reports_json,
    summary_line,
)


def sample_reports():
    return [
        IdentityReport("beta_identity", 0.5 + 1e-12, 0.5, 1e-10),
        IdentityReport("f_lower_bound", 0.3, (0.2, math.inf), note="σ = 2"),
        IdentityReport("tau0_value", 1.2, 1.0, 1e-3),
    ]


class TestAtomicWrites:

    def test_no_temporary_files_left(self, tmp_path):
        target = tmp_path / "nested" / "out.txt"
        atomic_write_text(target, "first\n")
        atomic_write_text(target, "second\n")
        assert target.read_text(encoding="utf-8") == "second\n"
        assert [p.name for p in target.parent.iterdir()] == ["out.txt"]

    def test_json_is_sorted(self, tmp_path):
        target = atomic_write_json(tmp_path / "a.json", {"b": 1, "a": [1.5]})
        text = target.read_text(encoding="utf-8")
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith("\n")

    def test_failed_write_keeps_target(self, tmp_path):
        target = tmp_path / "keep.json"
        atomic_write_json(target, {"ok": True})
        with pytest.raises(TypeError):
            atomic_write_json(target, {"bad": object()})
        assert json.loads(target.read_text(encoding="utf-8")) == {"ok": True}


class TestPathManager:

    def test_resolve(self, tmp_path):
        paths = PathManager(tmp_path / "run")
        assert paths.resolve(None, "fits.csv") == tmp_path / "run" / "fits.csv"
        assert (tmp_path / "run").is_dir()
        assert paths.resolve(tmp_path / "x.csv", "fits.csv") == tmp_path / "x.csv"
        assert paths.log_dir == tmp_path / "run" / "logs"

    def test_write_table_formats(self, tmp_path):
        paths = PathManager(tmp_path)
        frame = pd.DataFrame({"x": [0.1, 0.2], "K": [1.5, 1.25]})
        csv_path = paths.write_table(None, frame, "kernel.csv")
        assert csv_path.name == "kernel.csv"
        pd.testing.assert_frame_equal(pd.read_csv(csv_path), frame)

        json_path = paths.write_table(None, frame, "kernel.csv", fmt="json")
        assert json_path.name == "kernel.json"
        records = json.loads(json_path.read_text(encoding="utf-8"))
        assert records == [{"x": 0.1, "K": 1.5}, {"x": 0.2, "K": 1.25}]


class TestReportTables:

    def test_frame_layout(self):
        frame = reports_frame(sample_reports())
        assert list(frame.columns) == REPORT_COLUMNS
        assert frame["passed"].tolist() == [True, True, False]
        assert math.isnan(frame["expected"].iloc[1])
        assert frame["lower"].iloc[1] == 0.2
        assert frame["deviation"].iloc[2] == pytest.approx(0.2)

    def test_csv_reload(self, tmp_path):
        path = PathManager(tmp_path).write_csv(None, reports_frame(sample_reports()), "identities.csv")
        loaded = load_reports(path)
        assert [r.name for r in loaded] == ["beta_identity", "f_lower_bound", "tau0_value"]
        assert [r.passed for r in loaded] == [True, True, False]
        assert loaded[1].expected == (0.2, math.inf)
        assert loaded[1].note == "σ = 2"
        assert loaded[0].note == ""

    @pytest.mark.parametrize("wrap", [False, True])
    def test_json_reload(self, tmp_path, wrap):
        payload = reports_json(sample_reports())
        if wrap:
            payload = {"reports": payload}
        path = atomic_write_json(tmp_path / "fits.json", payload)
        loaded = load_reports(path)
        assert [r.passed for r in loaded] == [True, True, False]
        assert loaded[1].expected == (0.2, math.inf)

    def test_passed_is_recomputed(self):
        frame = reports_frame(sample_reports())
        frame.loc[2, "computed"] = 1.0005
        assert all(r.passed for r in frame_reports(frame))

    def test_missing_columns(self, tmp_path):
        with pytest.raises(InvalidInput):
            frame_reports(pd.DataFrame({"name": ["a"]}))
        with pytest.raises(InvalidInput):
            load_reports(tmp_path / "absent.csv")

    def test_consolidate_puts_failures_first(self, tmp_path):
        first = PathManager(tmp_path).write_csv(None, reports_frame(sample_reports()), "a.csv")
        second = atomic_write_json(tmp_path / "b.json", reports_json([IdentityReport("toy", 0.0, 0.0)]))
        frame = consolidate([first, second])
        assert frame["name"].tolist() == ["tau0_value", "beta_identity", "f_lower_bound", "toy"]
        assert summary_line(frame) == "FAIL: 1/4 checks failed (first: tau0_value)"
        with pytest.raises(InvalidInput):
            consolidate([])

    def test_summary_pass(self):
        frame = reports_frame(sample_reports()[:2])
        assert summary_line(frame) == "PASS: 2/2 checks passed"


def _square(x):
    return x * x


class TestParallelMap:

    @pytest.mark.parametrize("n_jobs", [1, 2])
    def test_order_is_kept(self, n_jobs):
        items = list(range(12))
        assert parallel_map(_square, items, n_jobs=n_jobs) == [x * x for x in items]

    def test_empty(self):
        assert parallel_map(_square, [], n_jobs=2) == []

    def test_arrays(self):
        results = parallel_map(np.sqrt, [4.0, 9.0], progress=False)
        np.testing.assert_allclose(results, [2.0, 3.0])

"""
全分辨率复现：N = 2^14，延拓到间隙 1e-3，单族约半小时

默认不运行，用 `pytest -m slow tests/test_acceptance.py` 启动。
"""
import pytest

from config import SolverConfig, VerifierConfig
from core.asymptotics import asymptotic_reports, rescale
from core.residual_verifier import verify_profile
from core.wave_solver import WaveFamily, continue_to_highest

pytestmark = pytest.mark.slow

FULL_MODES = 2 ** 14
FULL_STOP_GAP = 1e-3


@pytest.fixture(scope="module", params=["whitham", "bidirectional"])
def highest_wave(request):
    cfg = SolverConfig(family=request.param, modes=FULL_MODES, coarse_modes=128, stop_gap=FULL_STOP_GAP)
    return continue_to_highest(WaveFamily(request.param), cfg)[-1]


def test_crest_asymptotics(highest_wave):
    reports = asymptotic_reports(highest_wave, max_gap=FULL_STOP_GAP)
    failed = [(r.name, r.computed, r.expected) for r in reports if not r.passed]
    assert not failed


def test_condensed_residual(highest_wave):
    r = rescale(highest_wave, FULL_STOP_GAP)
    reports = verify_profile(r, cfg=VerifierConfig(threshold=1e-4, sample_points=8))
    assert len(reports) == 8
    assert all(report.passed for report in reports), [report.relative for report in reports]

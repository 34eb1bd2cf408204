import numpy as np
import pytest

from config import QuadratureConfig, SolverConfig
from core.asymptotics import rescale
from core.wave_solver import BranchTracer, WaveFamily

# 粗网格分支：几秒内走到间隙 0.05，只用于结构性检查
COARSE_STOP_GAP = 0.05


def coarse_solver_config(family: str, **overrides) -> SolverConfig:
    params = dict(family=family, modes=256, coarse_modes=64, stop_gap=COARSE_STOP_GAP, refine_gap=0.2)
    params.update(overrides)
    return SolverConfig(**params)


@pytest.fixture(scope="session")
def coarse_stop_gap():
    return COARSE_STOP_GAP


@pytest.fixture(scope="session")
def quad_cfg():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def whitham_tracer():
    tracer = BranchTracer(WaveFamily.WHITHAM, coarse_solver_config("whitham"))
    tracer.run()
    return tracer


@pytest.fixture(scope="session")
def bidirectional_tracer():
    tracer = BranchTracer(WaveFamily.BIDIRECTIONAL, coarse_solver_config("bidirectional"))
    tracer.run()
    return tracer


@pytest.fixture(scope="session")
def whitham_profile(whitham_tracer):
    return whitham_tracer.current


@pytest.fixture(scope="session")
def bidirectional_profile(bidirectional_tracer):
    return bidirectional_tracer.current


@pytest.fixture(scope="session")
def whitham_rescaled(whitham_profile):
    return rescale(whitham_profile, COARSE_STOP_GAP)


@pytest.fixture(scope="session")
def bidirectional_rescaled(bidirectional_profile):
    return rescale(bidirectional_profile, COARSE_STOP_GAP)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)

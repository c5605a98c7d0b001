"""Shared pytest fixtures."""

from __future__ import annotations

import os

import numpy as np
import pytest

from defectbench.chain import build_chain
from defectbench.gaussian import chain_ground_state, restrict
from defectbench.linalg import SkewMatrix
from defectbench.models import ChainSpec, DefectSpec, SubsystemSpec
from defectbench.precision import PrecisionContext

RUN_SLOW = os.environ.get("DEFECTBENCH_SLOW") == "1"


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if RUN_SLOW:
        return
    skip_slow = pytest.mark.skip(reason="large-N property; set DEFECTBENCH_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def ctx() -> PrecisionContext:
    """30 digits, the floor of the precision rule."""
    return PrecisionContext(30)


@pytest.fixture(scope="session")
def ctx60() -> PrecisionContext:
    return PrecisionContext(60)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture()
def random_skew(ctx, rng):
    """Factory: random skew matrix of the given dimension, entries in [-1, 1]."""

    def make(dim: int) -> SkewMatrix:
        values = rng.uniform(-1.0, 1.0, size=(dim, dim))
        return SkewMatrix.from_array(np.triu(values, 1), ctx)

    return make


@pytest.fixture()
def random_orthogonal(rng):
    def make(dim: int) -> np.ndarray:
        q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
        return q * np.sign(np.diag(r))

    return make


# ─── Chains ──────────────────────────────────────────────────────────────────


@pytest.fixture(scope="session")
def uniform8() -> ChainSpec:
    return build_chain(8)


@pytest.fixture(scope="session")
def energy8() -> ChainSpec:
    """J* = 0.2 on the centered bond of the half chain [0, 4)."""
    return build_chain(8, [DefectSpec(kind="energy", bond=1, strength="0.2")])


@pytest.fixture(scope="session")
def half8() -> SubsystemSpec:
    return SubsystemSpec(start=0, length=4)


@pytest.fixture(scope="session")
def uniform8_half(uniform8, half8, ctx):
    return restrict(chain_ground_state(uniform8, ctx), half8)

"""Tests for entropies, fermionic negativity and Gaussian fidelity."""

from __future__ import annotations

import numpy as np
import pytest

from defectbench.chain import boundary_defect_bond, build_chain, majorana_hamiltonian
from defectbench.errors import SpecError
from defectbench.gaussian import (
    CovarianceMatrix,
    chain_ground_state,
    ground_state_covariance,
    restrict,
)
from defectbench.linalg import HermitianMatrix, SkewMatrix, hermitian_eigen, matrix_function
from defectbench.models import BipartitionSpec, DefectSpec, SubsystemSpec
from defectbench.observables import (
    entropy,
    fidelity,
    log_negativity,
    renyi_entropy,
    to_bits,
)
from defectbench.oracle import fermion_ed_ground, gaussian_density_matrix
from defectbench.precision import PrecisionContext


def _covariance(upper: dict[tuple[int, int], int], dim: int, ctx) -> CovarianceMatrix:
    entries = ctx.zeros(dim)
    for (m, n), value in upper.items():
        entries[m, n] = ctx.mpf(value)
    return CovarianceMatrix(SkewMatrix(entries))


def _dense_fidelity(a: CovarianceMatrix, b: CovarianceMatrix, ctx):
    """Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)) on the 2^n-dimensional Fock space."""
    mp = ctx.mp
    rho_a, rho_b = gaussian_density_matrix(a, ctx), gaussian_density_matrix(b, ctx)
    rho_a = (rho_a + np.conjugate(rho_a).T) / 2
    root = matrix_function(
        HermitianMatrix.from_complex(rho_a, ctx), lambda x: mp.sqrt(max(x, 0)), ctx
    )
    sandwich = root @ rho_b @ root
    sandwich = (sandwich + np.conjugate(sandwich).T) / 2
    values, _ = hermitian_eigen(HermitianMatrix.from_complex(sandwich, ctx), ctx)
    return sum((mp.sqrt(max(v, 0)) for v in values), mp.zero)


@pytest.fixture()
def product_state(ctx) -> CovarianceMatrix:
    """Two modes, each in its own pure state."""
    return _covariance({(0, 1): 1, (2, 3): -1}, 4, ctx)


@pytest.fixture()
def entangled_pair(ctx) -> CovarianceMatrix:
    """Two modes sharing one fermion: Majoranas paired across the cut."""
    return _covariance({(0, 3): -1, (1, 2): 1}, 4, ctx)


class TestEntropy:
    def test_pure_state_zero(self, ctx, uniform8):
        value = entropy(chain_ground_state(uniform8, ctx), ctx)
        assert abs(value) < ctx.power_of_ten(-(ctx.decimal_digits - 12))

    def test_mixed_mode_ln2(self, ctx):
        value = entropy(CovarianceMatrix(SkewMatrix.zeros(4, ctx)), ctx)
        assert abs(value - 2 * ctx.mp.log(2)) < ctx.convergence_eps
        assert abs(to_bits(value, ctx) - 2) < ctx.convergence_eps

    def test_half_chain_positive(self, ctx, uniform8_half):
        assert 0 < entropy(uniform8_half, ctx) < 4 * ctx.mp.log(2)

    def test_complement_symmetry(self, ctx, uniform8):
        gamma = chain_ground_state(uniform8, ctx)
        left = entropy(restrict(gamma, SubsystemSpec(start=0, length=3)), ctx)
        right = entropy(restrict(gamma, SubsystemSpec(start=3, length=5)), ctx)
        assert abs(left - right) < ctx.power_of_ten(-20)


class TestRenyi:
    @pytest.mark.parametrize("alpha", ["0.5", "2", "7"])
    def test_mixed_mode_ln2(self, ctx, alpha):
        value = renyi_entropy(CovarianceMatrix(SkewMatrix.zeros(2, ctx)), alpha, ctx)
        assert abs(value - ctx.mp.log(2)) < ctx.convergence_eps

    def test_pure_state_zero(self, ctx, uniform8):
        value = renyi_entropy(chain_ground_state(uniform8, ctx), 2, ctx)
        assert abs(value) < ctx.power_of_ten(-15)

    def test_limit_approaches_entropy(self, ctx, uniform8_half):
        close = renyi_entropy(uniform8_half, "1.001", ctx)
        assert abs(close - entropy(uniform8_half, ctx)) < ctx.mpf("1e-2")

    @pytest.mark.parametrize("alpha", [0, -1, 1])
    def test_bad_index(self, ctx, uniform8_half, alpha):
        with pytest.raises(SpecError):
            renyi_entropy(uniform8_half, alpha, ctx)


class TestLogNegativity:
    def test_product_state_zero(self, ctx, product_state):
        value = log_negativity(product_state, BipartitionSpec(cut=1), ctx)
        assert 0 <= value < ctx.power_of_ten(-10)

    def test_entangled_pair_ln2(self, ctx, entangled_pair):
        value = log_negativity(entangled_pair, BipartitionSpec(cut=1), ctx)
        assert abs(value - ctx.mp.log(2)) < ctx.power_of_ten(-10)

    def test_pure_state_equals_renyi_half(self, ctx, entangled_pair):
        left = restrict(entangled_pair, SubsystemSpec(start=0, length=1))
        half = renyi_entropy(left, "0.5", ctx)
        value = log_negativity(entangled_pair, BipartitionSpec(cut=1), ctx)
        assert abs(value - half) < ctx.power_of_ten(-10)

    def test_half_chain_non_negative(self, ctx, uniform8_half):
        value = log_negativity(uniform8_half, BipartitionSpec(cut=2), ctx)
        assert value > 0

    def test_cut_outside(self, ctx, product_state):
        with pytest.raises(SpecError):
            log_negativity(product_state, BipartitionSpec(cut=2), ctx)


class TestFidelity:
    def test_identical_mixed_states(self, ctx, uniform8_half):
        assert abs(fidelity(uniform8_half, uniform8_half, ctx) - 1) < ctx.power_of_ten(-15)

    def test_symmetric_and_below_one(self, ctx, uniform8_half, half8):
        spec = build_chain(8, [DefectSpec(kind="energy", bond=1, strength="0.5")])
        other = restrict(chain_ground_state(spec, ctx), half8)
        forward = fidelity(uniform8_half, other, ctx)
        backward = fidelity(other, uniform8_half, ctx)
        assert 0 < forward < 1
        assert abs(forward - backward) < ctx.power_of_ten(-15)

    def test_orthogonal_pure_modes(self, ctx):
        up = _covariance({(0, 1): 1}, 2, ctx)
        down = _covariance({(0, 1): -1}, 2, ctx)
        assert fidelity(up, down, ctx) < ctx.power_of_ten(-8)

    def test_dimension_mismatch(self, ctx, uniform8_half, product_state):
        with pytest.raises(SpecError):
            fidelity(uniform8_half, product_state, ctx)

    def test_matches_dense_density_matrices(self, ctx, uniform8_half, half8):
        spec = build_chain(8, [DefectSpec(kind="energy", bond=1, strength="0.3")])
        other = restrict(chain_ground_state(spec, ctx), half8)
        for a, b in [(uniform8_half, uniform8_half), (uniform8_half, other)]:
            expected = _dense_fidelity(a, b, ctx)
            assert abs(fidelity(a, b, ctx) - expected) < ctx.power_of_ten(-18)

    def test_pure_states_give_overlap(self, ctx, uniform8):
        spec = build_chain(8, [DefectSpec(kind="energy", bond=1, strength="0.5")])
        kernels = [majorana_hamiltonian(chain, ctx) for chain in (uniform8, spec)]
        a, b = (ground_state_covariance(s, ctx) for s in kernels)
        psi_a, psi_b = (fermion_ed_ground(s).ground.amplitudes for s in kernels)
        overlap = abs(np.dot(np.conjugate(psi_a), psi_b))
        value = fidelity(a, b, ctx)
        assert 0 < value < 1
        assert abs(value - overlap) < ctx.power_of_ten(-20)


class TestFidelityNearlyPureModes:
    """Half chains of N = 24 carry modes with 1 - nu far below double precision."""

    @pytest.fixture(scope="class")
    def ctx24(self) -> PrecisionContext:
        return PrecisionContext.for_system_size(24)

    @pytest.fixture(scope="class")
    def halves(self, ctx24) -> list[CovarianceMatrix]:
        half = SubsystemSpec(start=6, length=12)
        bond = boundary_defect_bond(half, 24)
        states = []
        for strength in ("0.2", "0.6"):
            spec = build_chain(24, [DefectSpec(kind="energy", bond=bond, strength=strength)])
            states.append(restrict(chain_ground_state(spec, ctx24), half))
        return states

    def test_state_with_itself_is_one(self, ctx24, halves):
        for gamma in halves:
            assert abs(fidelity(gamma, gamma, ctx24) - 1) < ctx24.power_of_ten(-20)

    def test_symmetric_and_bounded(self, ctx24, halves):
        a, b = halves
        forward = fidelity(a, b, ctx24)
        backward = fidelity(b, a, ctx24)
        assert 0 < forward < 1
        assert abs(forward - backward) < ctx24.power_of_ten(-20)

    def test_full_chain_with_itself_is_one(self, ctx24):
        gamma = chain_ground_state(build_chain(24), ctx24)
        assert abs(fidelity(gamma, gamma, ctx24) - 1) < ctx24.power_of_ten(-20)

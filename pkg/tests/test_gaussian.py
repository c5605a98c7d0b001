"""Tests for ground-state covariances, spectra and entanglement Hamiltonians."""

from __future__ import annotations

import pytest

from defectbench.chain import build_chain, majorana_hamiltonian
from defectbench.errors import PrecisionEscalationError, SpecError
from defectbench.gaussian import (
    CovarianceMatrix,
    chain_ground_state,
    covariance_from_entanglement_hamiltonian,
    entanglement_hamiltonian,
    entanglement_hamiltonian_by_inverse,
    ground_state_covariance,
    ground_state_energy,
    many_body_spectrum,
    restrict,
    single_particle_spectrum,
    state_energy,
    uniform_ring_covariance,
)
from defectbench.linalg import SkewMatrix
from defectbench.models import DefectSpec, SubsystemSpec


def _pfaffian4(g) -> object:
    e = g.entries
    return e[0, 1] * e[2, 3] - e[0, 2] * e[1, 3] + e[0, 3] * e[1, 2]


def _single_mode(nu, ctx) -> CovarianceMatrix:
    return CovarianceMatrix(SkewMatrix.from_array([[0, -nu], [nu, 0]], ctx))


class TestGroundState:
    def test_single_pair(self, ctx):
        s = SkewMatrix.from_array([[0, -2], [2, 0]], ctx)
        gamma = ground_state_covariance(s, ctx)
        assert abs(gamma.gamma.entries[0, 1] + 1) < ctx.convergence_eps
        assert gamma.parity == -1

    def test_uniform_chain_is_pure(self, ctx, uniform8):
        gamma = chain_ground_state(uniform8, ctx)
        assert gamma.is_pure(ctx)
        assert gamma.zero_modes == 0
        assert gamma.parity == 1

    def test_matches_closed_form_ring(self, ctx, uniform8):
        gamma = chain_ground_state(uniform8, ctx)
        closed = uniform_ring_covariance(8, ctx)
        assert (gamma.gamma - closed.gamma).max_abs() < ctx.power_of_ten(-20)

    def test_closed_form_on_site_value(self, ctx):
        closed = uniform_ring_covariance(64, ctx, subsystem=SubsystemSpec(start=0, length=1))
        assert abs(closed.gamma.entries[0, 1] - 2 / ctx.mp.pi) < ctx.mpf("1e-3")

    def test_closed_form_rejects_periodic(self, ctx):
        with pytest.raises(SpecError):
            uniform_ring_covariance(8, ctx, boundary_sign=1)

    @pytest.mark.parametrize("parity", [1, -1])
    def test_zero_modes_follow_requested_parity(self, ctx, parity):
        gamma = ground_state_covariance(SkewMatrix.zeros(4, ctx), ctx, parity=parity)
        assert gamma.zero_modes == 2
        assert gamma.parity == parity
        assert gamma.is_pure(ctx)
        assert abs(_pfaffian4(gamma.gamma) - parity) < ctx.convergence_eps

    def test_duality_defect_is_pure(self, ctx):
        spec = build_chain(8, [DefectSpec(kind="duality", bond=2)])
        gamma = chain_ground_state(spec, ctx)
        assert gamma.zero_modes >= 1
        assert gamma.parity == 1
        assert gamma.is_pure(ctx)

    @pytest.mark.parametrize("n_sites", [8, 20])
    @pytest.mark.parametrize("kind", ["antiperiodic", "duality"])
    def test_zero_mode_chains(self, ctx, kind, n_sites):
        spec = build_chain(n_sites, [DefectSpec(kind=kind, bond=1)])
        gamma = chain_ground_state(spec, ctx)
        assert gamma.zero_modes >= 1
        assert gamma.parity == 1
        assert gamma.purity_defect < ctx.power_of_ten(-20)
        s = majorana_hamiltonian(spec, ctx)
        gap = state_energy(s, gamma, ctx) - ground_state_energy(s, ctx)
        assert abs(gap) < ctx.power_of_ten(-20)

    def test_antiperiodic_has_one_zero_mode(self, ctx):
        spec = build_chain(8, [DefectSpec(kind="antiperiodic", bond=1)])
        assert chain_ground_state(spec, ctx).zero_modes == 1

    def test_energy(self, ctx, uniform8):
        s = majorana_hamiltonian(uniform8, ctx)
        expected = -1 / ctx.mp.sin(ctx.mp.pi / 16)
        assert abs(ground_state_energy(s, ctx) - expected) < ctx.power_of_ten(-25)
        gamma = chain_ground_state(uniform8, ctx)
        assert abs(state_energy(s, gamma, ctx) - expected) < ctx.power_of_ten(-25)

    def test_methods_agree_on_chain(self, ctx, energy8):
        s = majorana_hamiltonian(energy8, ctx)
        a = ground_state_covariance(s, ctx, method="tridiagonal")
        b = ground_state_covariance(s, ctx, method="hermitian")
        assert (a.gamma - b.gamma).max_abs() < ctx.power_of_ten(-20)


class TestRestrict:
    def test_full_system_unchanged(self, ctx):
        gamma = uniform_ring_covariance(8, ctx)
        sub = restrict(gamma, SubsystemSpec(start=0, length=7))
        assert sub.dim == 14
        assert sub.gamma.entries[3, 10] == gamma.gamma.entries[3, 10]

    def test_whole_chain(self, ctx, uniform8):
        gamma = chain_ground_state(uniform8, ctx)
        whole = restrict(gamma, SubsystemSpec(start=0, length=8))
        assert whole.dim == 16
        assert (whole.gamma - gamma.gamma).max_abs() == 0
        assert whole.is_pure(ctx)

    def test_single_site(self, ctx, uniform8):
        block = restrict(chain_ground_state(uniform8, ctx), SubsystemSpec(start=3, length=1))
        nu = block.gamma.entries[0, 1]
        assert 0 < abs(nu) < 1

    def test_wraparound_indices(self, ctx, uniform8):
        gamma = chain_ground_state(uniform8, ctx)
        sub = restrict(gamma, SubsystemSpec(start=7, length=2))
        assert sub.gamma.entries[1, 2] == gamma.gamma.entries[15, 0]


class TestSpectra:
    def test_pure_state_all_ones(self, ctx, uniform8):
        spectrum = single_particle_spectrum(chain_ground_state(uniform8, ctx), ctx)
        assert all(abs(1 - nu) < ctx.purity_eps for nu in spectrum.nu)

    def test_maximally_mixed(self, ctx):
        spectrum = single_particle_spectrum(CovarianceMatrix(SkewMatrix.zeros(4, ctx)), ctx)
        assert list(spectrum.nu) == [0, 0]
        assert list(spectrum.eps) == [0, 0]

    def test_half_chain_descending(self, ctx, uniform8_half):
        spectrum = single_particle_spectrum(uniform8_half, ctx)
        nu = list(spectrum.nu)
        assert nu == sorted(nu, reverse=True)
        assert all(0 <= v < 1 for v in nu)
        assert len(spectrum.finite_eps()) == 4

    def test_many_body_enumeration(self):
        assert many_body_spectrum([], 5) == [0]
        assert many_body_spectrum([2, 1], 4) == [0, 1, 2, 3]
        assert many_body_spectrum([1, 2, 3], 5) == [0, 1, 2, 3, 3]
        assert many_body_spectrum([1, 2, 3], 100) == [0, 1, 2, 3, 3, 4, 5, 6]

    def test_many_body_rejects_bad_input(self):
        with pytest.raises(SpecError):
            many_body_spectrum([1, 2], 0)
        with pytest.raises(SpecError):
            many_body_spectrum([-1, 2], 3)


class TestEntanglementHamiltonian:
    def test_zero_for_maximally_mixed(self, ctx):
        w = entanglement_hamiltonian(CovarianceMatrix(SkewMatrix.zeros(4, ctx)), ctx)
        assert w.max_abs() == 0

    def test_round_trip(self, ctx, uniform8_half):
        w = entanglement_hamiltonian(uniform8_half, ctx)
        back = covariance_from_entanglement_hamiltonian(w, ctx)
        assert (back.gamma - uniform8_half.gamma).max_abs() < ctx.power_of_ten(-20)

    def test_inverse_route_agrees(self, ctx, uniform8_half):
        w = entanglement_hamiltonian(uniform8_half, ctx)
        literal = entanglement_hamiltonian_by_inverse(uniform8_half, ctx)
        assert (w - literal).max_abs() < ctx.power_of_ten(-15)

    def test_inverse_route_agrees_on_a_longer_interval(self, ctx):
        spec = build_chain(12, [DefectSpec(kind="energy", bond=11, strength="0.5")])
        gamma_a = restrict(chain_ground_state(spec, ctx), SubsystemSpec(start=0, length=6))
        w = entanglement_hamiltonian(gamma_a, ctx)
        literal = entanglement_hamiltonian_by_inverse(gamma_a, ctx)
        assert (w - literal).max_abs() < ctx.power_of_ten(-15)

    def test_nearly_pure_mode_escalates(self, ctx):
        nu = 1 - ctx.power_of_ten(-25)
        with pytest.raises(PrecisionEscalationError) as info:
            entanglement_hamiltonian(_single_mode(nu, ctx), ctx)
        assert info.value.required_digits > ctx.decimal_digits

    def test_pure_mode_escalates(self, ctx):
        with pytest.raises(PrecisionEscalationError):
            entanglement_hamiltonian(_single_mode(1, ctx), ctx)

"""Tests for the Monte Carlo link simulator: kernel parity, determinism,
statistical agreement with the analytics, and the validation driver."""

import math

import numpy as np
import pytest

from fso_adapt import _psk_kernel_py, simulator
from fso_adapt._tables import POPCOUNT, TAB_IM, TAB_OFFSET, TAB_RE
from fso_adapt.adaptation import compute_boundaries, spectral_efficiency
from fso_adapt.link import LinkBudget, ModOrder
from fso_adapt.numerics import inverse_q, q_function
from fso_adapt.simulator import SimConfig, run, validate_point
from fso_adapt.turbulence import MimoConfig, TurbulenceParams

try:
    from fso_adapt import _psk_kernel as _compiled
except ImportError:
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None, reason="compiled kernel not built")


def no_fading() -> TurbulenceParams:
    return TurbulenceParams(sigma_x=1e-9)


class TestKernels:
    @staticmethod
    def _draws(seed: int, nb: int, k: int):
        rng = np.random.default_rng(seed)
        amp = np.abs(rng.normal(2.0, 1.5, nb)) + 0.01
        m = rng.choice(np.array([0, 2, 4, 8, 16, 32], dtype=np.int64), nb)
        u = rng.random(nb * k)
        noise = rng.standard_normal(2 * nb * k)
        return amp, m, u, noise

    def test_numpy_kernel_noiseless_is_error_free(self):
        nb, k = 50, 200
        amp, m, u, _ = self._draws(3, nb, k)
        noise = np.zeros(2 * nb * k)
        errors = _psk_kernel_py.count_bit_errors(
            amp, m, u, noise, k, TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT
        )
        assert errors == 0

    def test_numpy_kernel_bpsk_matches_sign_rule(self):
        rng = np.random.default_rng(11)
        nb, k = 20, 1000
        amp = np.full(nb, 1.2)
        m = np.full(nb, 2, dtype=np.int64)
        u = rng.random(nb * k)
        noise = rng.standard_normal(2 * nb * k)
        errors = _psk_kernel_py.count_bit_errors(
            amp, m, u, noise, k, TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT
        )
        sent = (u * 2).astype(np.int64)
        received = np.where(sent == 0, 1.2, -1.2) + math.sqrt(0.5) * noise[0::2]
        decided = (received < 0).astype(np.int64)
        assert errors == int(np.count_nonzero(sent != decided))

    @needs_compiled
    def test_backends_bit_identical(self):
        for seed, nb, k in ((0, 137, 61), (1, 999, 17), (2, 64, 512)):
            amp, m, u, noise = self._draws(seed, nb, k)
            a = _psk_kernel_py.count_bit_errors(
                amp, m, u, noise, k, TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT
            )
            b = _compiled.count_bit_errors(
                amp, m, u, noise, k, TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT
            )
            assert a == b

    @needs_compiled
    @pytest.mark.parametrize("trial", range(12))
    def test_backends_bit_identical_fuzz(self, trial):
        # Random shapes, every constellation size, amplitudes spanning
        # six orders of magnitude.
        rng = np.random.default_rng(10_000 + trial)
        nb = int(rng.integers(1, 400))
        k = int(rng.integers(1, 700))
        amp = np.abs(rng.normal(0.0, 3.0, nb)) * rng.choice([1e-6, 0.1, 1.0, 20.0], nb)
        m = rng.choice(np.array([0, 2, 4, 8, 16, 32, 64, 128, 256], dtype=np.int64), nb)
        u = rng.random(nb * k)
        noise = rng.standard_normal(2 * nb * k)
        a = _psk_kernel_py.count_bit_errors(amp, m, u, noise, k, TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT)
        b = _compiled.count_bit_errors(amp, m, u, noise, k, TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT)
        assert a == b

    @needs_compiled
    def test_backend_selected_at_import(self):
        assert simulator.KERNEL_BACKEND == "compiled"

    @needs_compiled
    def test_run_identical_across_backends(self):
        config = SimConfig(
            blocks=3000,
            symbols_per_block=100,
            seed=99,
            mode=compute_boundaries(5, 1e-3, LinkBudget.from_db(12.0)),
            channel=TurbulenceParams(sigma_x=0.3),
            budget=LinkBudget.from_db(12.0),
        )
        original = simulator.active_kernel
        try:
            simulator.active_kernel = _compiled.count_bit_errors
            with_compiled = run(config)
            simulator.active_kernel = _psk_kernel_py.count_bit_errors
            with_numpy = run(config)
        finally:
            simulator.active_kernel = original
        assert with_compiled.bit_errors == with_numpy.bit_errors
        assert with_compiled.bits_sent == with_numpy.bits_sent
        assert with_compiled.per_region_histogram == with_numpy.per_region_histogram


class TestSimConfig:
    def test_guard_rail(self):
        with pytest.raises(ValueError):
            SimConfig(
                blocks=10 ** 6,
                symbols_per_block=10 ** 4,
                seed=1,
                mode=ModOrder(2),
                channel=no_fading(),
                budget=LinkBudget(avg_snr=1.0),
            )

    def test_adaptive_budget_consistency(self):
        scheme = compute_boundaries(3, 1e-3, LinkBudget.from_db(10.0))
        with pytest.raises(ValueError):
            SimConfig(
                blocks=10,
                symbols_per_block=10,
                seed=1,
                mode=scheme,
                channel=no_fading(),
                budget=LinkBudget.from_db(12.0),
            )


class TestRunDeterminism:
    @staticmethod
    def _config(seed: int = 7) -> SimConfig:
        budget = LinkBudget.from_db(13.0)
        return SimConfig(
            blocks=5000,
            symbols_per_block=300,
            seed=seed,
            mode=compute_boundaries(5, 1e-3, budget),
            channel=TurbulenceParams(sigma_x=0.3),
            budget=budget,
        )

    def test_identical_reports_for_identical_config(self):
        assert run(self._config()) == run(self._config())

    def test_seed_changes_stream(self):
        assert run(self._config(seed=7)) != run(self._config(seed=8))

    def test_worker_count_does_not_change_results(self):
        base = run(self._config(), workers=1)
        assert run(self._config(), workers=2) == base
        assert run(self._config(), workers=4) == base

    def test_oversized_block_slab_path(self):
        # One block larger than the chunk target exercises the slab loop.
        budget = LinkBudget.from_db(6.0)
        config = SimConfig(
            blocks=1,
            symbols_per_block=(1 << 20) + 4321,
            seed=3,
            mode=ModOrder(2),
            channel=no_fading(),
            budget=budget,
        )
        report = run(config)
        assert report.bits_sent == config.symbols_per_block
        want = q_function(math.sqrt(2.0 * budget.avg_snr))
        assert abs(report.ber_point - want) < 5.0 * report.ber_ci95


class TestRunStatistics:
    def test_noiseless_limit_zero_errors(self):
        budget = LinkBudget(avg_snr=1e12)
        config = SimConfig(
            blocks=100,
            symbols_per_block=1000,
            seed=5,
            mode=ModOrder(8),
            channel=no_fading(),
            budget=budget,
        )
        report = run(config)
        assert report.bit_errors == 0
        assert report.bits_sent == 300000

    def test_bpsk_no_fading_hits_known_ber(self):
        # snr chosen so Q(sqrt(2 snr)) = 1e-2; 1e7 symbols.
        snr = inverse_q(1e-2) ** 2 / 2.0
        budget = LinkBudget(avg_snr=snr)
        config = SimConfig(
            blocks=10 ** 4,
            symbols_per_block=10 ** 3,
            seed=17,
            mode=ModOrder(2),
            channel=no_fading(),
            budget=budget,
        )
        report = run(config)
        ci_ref = 1.96 * math.sqrt(1e-2 * 0.99 / report.bits_sent)
        assert abs(report.ber_point - 1e-2) <= ci_ref

    def test_adaptive_matches_analytics(self):
        budget = LinkBudget.from_db(15.0)
        scheme = compute_boundaries(5, 1e-3, budget)
        params = TurbulenceParams(sigma_x=0.3)
        config = SimConfig(
            blocks=10 ** 7,
            symbols_per_block=1,
            seed=23,
            mode=scheme,
            channel=params,
            budget=budget,
        )
        report = run(config)
        eff = spectral_efficiency(scheme, params)
        assert abs(0.5 * report.throughput_bits_per_symbol - eff) / eff < 0.02
        assert report.ber_point <= 1e-3 + report.ber_ci95
        assert sum(report.per_region_histogram) == config.blocks - round(
            report.outage_fraction * config.blocks
        )

    def test_histogram_matches_region_probabilities(self):
        from fso_adapt.adaptation import region_probabilities

        budget = LinkBudget.from_db(12.0)
        scheme = compute_boundaries(5, 1e-3, budget)
        params = TurbulenceParams(sigma_x=0.3)
        config = SimConfig(
            blocks=2 * 10 ** 5,
            symbols_per_block=1,
            seed=31,
            mode=scheme,
            channel=params,
            budget=budget,
        )
        report = run(config)
        outage, probs = region_probabilities(scheme, params)
        assert report.outage_fraction == pytest.approx(outage, abs=0.005)
        empirical = np.asarray(report.per_region_histogram) / config.blocks
        assert empirical == pytest.approx(probs, abs=0.005)

    def test_mimo_trivial_array_report_identical_to_siso(self):
        budget = LinkBudget.from_db(14.0)
        scheme = compute_boundaries(5, 1e-3, budget)

        def build(channel):
            return SimConfig(
                blocks=20000,
                symbols_per_block=50,
                seed=41,
                mode=scheme,
                channel=channel,
                budget=budget,
            )

        assert run(build(TurbulenceParams(sigma_x=0.3))) == run(
            build(MimoConfig(f_tx=1, l_rx=1, sigma_x=0.3))
        )


class TestValidatePoint:
    def test_bpsk_no_fading_passes_at_one_percent(self):
        result = validate_point(4.32, no_fading(), ModOrder(2), 0.01, seed=100)
        assert result.status == "pass"
        assert abs(result.details["signed_gap"]) <= result.details["pass_band"]

    def test_bpsk_fading_point_passes(self):
        result = validate_point(10.0, TurbulenceParams(sigma_x=0.3), ModOrder(2), 0.05, seed=101)
        assert result.status == "pass"

    def test_eight_psk_reports_signed_gap(self):
        # The analytic side uses the nearest-neighbour approximation, so
        # a small systematic gap is expected and must be reported.
        result = validate_point(15.0, TurbulenceParams(sigma_x=0.1), ModOrder(8), 0.05, seed=102)
        assert result.status == "pass"
        assert "signed_gap" in result.details

    def test_adaptive_point(self):
        budget = LinkBudget.from_db(15.0)
        scheme = compute_boundaries(5, 1e-3, budget)
        result = validate_point(15.0, TurbulenceParams(sigma_x=0.3), scheme, 0.02, seed=103)
        assert result.status == "pass"
        assert result.details["simulated_ber"] <= 1e-3 + result.report.ber_ci95

    def test_mimo_point_reports_approximation_gap(self):
        budget = LinkBudget.from_db(15.0)
        scheme = compute_boundaries(5, 1e-3, budget)
        result = validate_point(
            15.0, MimoConfig(f_tx=2, l_rx=2, sigma_x=0.3), scheme, 0.05, seed=104
        )
        assert result.details["aggregate_law_is_approximation"] is True
        assert "spectral_eff_signed_gap" in result.details
        assert result.status == "pass"

    def test_infeasible_sample_size_is_inconclusive(self):
        # Tiny tolerance at a tiny BER needs more symbols than the guard
        # rail allows.
        result = validate_point(20.0, TurbulenceParams(sigma_x=0.1), ModOrder(2), 1e-4, seed=105)
        assert result.status == "inconclusive"
        assert result.report is None

    def test_tolerance_validation(self):
        with pytest.raises(ValueError):
            validate_point(10.0, no_fading(), ModOrder(2), 0.0)

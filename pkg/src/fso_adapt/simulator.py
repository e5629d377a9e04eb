"""Independent Monte Carlo oracle: symbol-level simulation of the
subcarrier PSK link over sampled fading.

Normalization: the received sample per symbol is

    r = sqrt(avg_snr) * I * s + n,   |s| = 1,   E{|n|^2} = 1

(circularly symmetric complex noise, variance 1/2 per dimension); this
is algebraically identical to the physical front-end model, so the
individual constants (modulation index, efficiency, optical power,
pulse energy) never appear.  Fading is drawn exactly -- for aperture
arrays that means the true arithmetic mean of per-path coefficients,
NOT the lognormal approximation the analytics use, so simulated-vs-
analytic gaps quantify both the nearest-neighbour BER approximation and
the aggregate-fading approximation.

Determinism: work splits into fixed chunks of consecutive blocks; each
chunk owns the generator ``default_rng([seed, chunk_index])`` and draws
in a fixed layout (fading, then per-slab symbol uniforms and noise
normals).  Results therefore depend only on (config, seed), never on
worker count or scheduling, and chunk tallies merge by exact integer
addition.

The demodulation inner loop is the hot path; a compiled kernel is
preferred at import time with a bit-identical numpy fallback (see
``KERNEL_BACKEND``).
"""

from __future__ import annotations

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _psk_kernel_py
from ._tables import MAX_CONSTELLATION, POPCOUNT, TAB_IM, TAB_OFFSET, TAB_RE
from .adaptation import AdaptiveScheme, average_ber_adaptive, spectral_efficiency
from .link import LinkBudget, ModOrder, ber_average
from .turbulence import FadingLaw, draw_fading

try:
    from . import _psk_kernel as _kernel_module
except ImportError:  # extension not built; numpy fallback
    _kernel_module = _psk_kernel_py

KERNEL_BACKEND: str = _kernel_module.BACKEND

# Swappable at runtime (benchmarks and backend-parity tests); read on
# every chunk, not captured.
active_kernel = _kernel_module.count_bit_errors

# Target symbols per chunk; one chunk is the unit of work and of RNG
# stream assignment.
CHUNK_SYMBOLS = 1 << 20

# Guard rail against accidentally monstrous runs.
MAX_TOTAL_SYMBOLS = 10 ** 9

# Simulations sized automatically aim for at least this many expected
# bit errors, for stable confidence intervals.
TARGET_ERRORS = 100.0


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: channel, link budget, mode, and sizing."""

    blocks: int
    symbols_per_block: int
    seed: int
    mode: Union[ModOrder, AdaptiveScheme]
    channel: FadingLaw
    budget: LinkBudget

    def __post_init__(self) -> None:
        if self.blocks < 1 or self.symbols_per_block < 1:
            raise ValueError("blocks and symbols_per_block must be >= 1")
        if self.blocks * self.symbols_per_block > MAX_TOTAL_SYMBOLS:
            raise ValueError(
                f"blocks * symbols_per_block exceeds the {MAX_TOTAL_SYMBOLS:.0e} guard rail"
            )
        if isinstance(self.mode, AdaptiveScheme):
            if self.mode.budget.avg_snr != self.budget.avg_snr:
                raise ValueError("adaptive scheme was computed for a different link budget")
            top = self.mode.orders[-1].m
        else:
            top = self.mode.m
        if top > MAX_CONSTELLATION:
            raise ValueError(f"constellations above {MAX_CONSTELLATION}-PSK are not supported")

    @property
    def total_symbols(self) -> int:
        return self.blocks * self.symbols_per_block


@dataclass(frozen=True)
class SimReport:
    """Tallies of one run.  ``ber_ci95`` is the normal-approximation
    binomial half-width; ``per_region_histogram`` counts blocks per
    active order (fixed mode: a single bucket)."""

    bits_sent: int
    bit_errors: int
    ber_point: float
    ber_ci95: float
    throughput_bits_per_symbol: float
    outage_fraction: float
    per_region_histogram: tuple[int, ...]
    blocks: int
    symbols_per_block: int
    seed: int
    kernel: str


def _run_chunk(config: SimConfig, chunk_index: int, block_lo: int, block_hi: int):
    rng = np.random.default_rng([config.seed, chunk_index])
    nb = block_hi - block_lo
    k = config.symbols_per_block
    fading = draw_fading(config.channel, rng, nb)
    amp = math.sqrt(config.budget.avg_snr) * fading

    if isinstance(config.mode, AdaptiveScheme):
        region = np.searchsorted(config.mode.boundaries, fading, side="right") - 1
        m_values = np.array([order.m for order in config.mode.orders], dtype=np.int64)
        bits_values = np.array([order.bits for order in config.mode.orders], dtype=np.int64)
        transmitting = region >= 0
        clamped = np.maximum(region, 0)
        m_blocks = np.where(transmitting, m_values[clamped], 0).astype(np.int64)
        bits_per_block = np.where(transmitting, bits_values[clamped], 0)
        histogram = np.bincount(region[transmitting], minlength=len(m_values))
        outage_blocks = int(np.count_nonzero(~transmitting))
    else:
        m_blocks = np.full(nb, config.mode.m, dtype=np.int64)
        bits_per_block = np.full(nb, config.mode.bits, dtype=np.int64)
        histogram = np.array([nb], dtype=np.int64)
        outage_blocks = 0

    bits_sent = int(bits_per_block.sum()) * k

    kernel = active_kernel
    errors = 0
    if k <= CHUNK_SYMBOLS:
        u = rng.random(nb * k)
        noise = rng.standard_normal(2 * nb * k)
        errors = int(kernel(amp, m_blocks, u, noise, k, TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT))
    else:
        # Oversized block: chunking guarantees nb == 1 here; slab the
        # symbol stream with the same draw order.
        assert nb == 1
        done = 0
        while done < k:
            slab = min(CHUNK_SYMBOLS, k - done)
            u = rng.random(slab)
            noise = rng.standard_normal(2 * slab)
            errors += int(
                kernel(amp, m_blocks, u, noise, slab, TAB_RE, TAB_IM, TAB_OFFSET, POPCOUNT)
            )
            done += slab
    return errors, bits_sent, histogram, outage_blocks


def run(config: SimConfig, workers: int = 1) -> SimReport:
    """Execute the simulation; deterministic for (config, seed) at any
    worker count."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    k = config.symbols_per_block
    blocks_per_chunk = max(1, CHUNK_SYMBOLS // k)
    bounds = list(range(0, config.blocks, blocks_per_chunk)) + [config.blocks]
    tasks = [(idx, lo, hi) for idx, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:]))]

    if workers == 1 or len(tasks) == 1:
        results = [_run_chunk(config, *task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, config, *task) for task in tasks]
            results = [f.result() for f in futures]  # merged in chunk order

    bit_errors = sum(r[0] for r in results)
    bits_sent = sum(r[1] for r in results)
    histogram = np.sum([r[2] for r in results], axis=0)
    outage_blocks = sum(r[3] for r in results)

    if bits_sent > 0:
        ber = bit_errors / bits_sent
        ci95 = 1.96 * math.sqrt(max(ber * (1.0 - ber), 0.0) / bits_sent)
    else:
        ber = math.nan
        ci95 = math.nan
    backend = getattr(sys.modules.get(active_kernel.__module__), "BACKEND", "unknown")
    return SimReport(
        bits_sent=bits_sent,
        bit_errors=bit_errors,
        ber_point=ber,
        ber_ci95=ci95,
        throughput_bits_per_symbol=bits_sent / config.total_symbols,
        outage_fraction=outage_blocks / config.blocks,
        per_region_histogram=tuple(int(h) for h in histogram),
        blocks=config.blocks,
        symbols_per_block=config.symbols_per_block,
        seed=config.seed,
        kernel=backend,
    )


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of one simulator-vs-analytics comparison."""

    status: str  # "pass" | "fail" | "inconclusive"
    details: dict
    report: SimReport | None


def _fixed_point_size(analytic_ber: float, bits_per_symbol: int, tolerance: float) -> int | None:
    # Bits needed so that the 95% CI half-width stays below
    # tolerance * analytic value; None when the guard rail forbids it.
    needed = 1.96 ** 2 * (1.0 - analytic_ber) / (tolerance ** 2 * analytic_ber)
    needed = max(needed, TARGET_ERRORS / analytic_ber)
    symbols = int(math.ceil(needed / bits_per_symbol))
    if symbols > MAX_TOTAL_SYMBOLS:
        return None
    return max(symbols, 10 ** 5)


def validate_point(
    snr_db: float,
    params: FadingLaw,
    mode: Union[ModOrder, AdaptiveScheme],
    tolerance: float,
    *,
    seed: int = 2024,
    symbols_per_block: int = 1,
    workers: int = 1,
) -> ValidationResult:
    """Size, run and judge one simulated point against the analytics.

    ``symbols_per_block`` defaults to 1 so every symbol sees a fresh
    fading draw: the marginal error indicator is then exactly Bernoulli
    and the binomial CI is the right yardstick.  (With long blocks the
    fading-sampling noise dominates the binomial term and a binomial CI
    would understate the run-to-run spread.)

    Fixed order: the simulated BER must sit within
    max(3 reference CI half-widths, tolerance * analytic) of the
    fading-averaged analytic BER; the reference CI uses the analytic
    probability, so an error-free run at a tiny analytic BER still
    judges correctly, and the tolerance floor absorbs the known small
    bias of the nearest-neighbour BER approximation for orders above 2.
    Adaptive: the empirical throughput/2 must match the spectral
    efficiency within ``tolerance`` relative, and the simulated BER may
    not exceed the target by more than its own CI half-width.  For
    aperture arrays the comparison doubles as a measurement of the
    lognormal aggregate approximation; the signed gaps are reported
    either way.
    """
    if not (tolerance > 0.0):
        raise ValueError("tolerance must be positive")
    budget = LinkBudget.from_db(snr_db)

    if isinstance(mode, ModOrder):
        analytic = ber_average(mode, params, budget)
        symbols = _fixed_point_size(analytic, mode.bits, tolerance)
        if symbols is None:
            return ValidationResult(
                status="inconclusive",
                details={
                    "reason": "required sample size exceeds the guard rail",
                    "analytic_ber": analytic,
                },
                report=None,
            )
        blocks = max(1, math.ceil(symbols / symbols_per_block))
        config = SimConfig(
            blocks=blocks,
            symbols_per_block=symbols_per_block,
            seed=seed,
            mode=mode,
            channel=params,
            budget=budget,
        )
        report = run(config, workers=workers)
        ci_ref = 1.96 * math.sqrt(analytic * (1.0 - analytic) / report.bits_sent)
        gap = report.ber_point - analytic
        ok = abs(gap) <= max(3.0 * ci_ref, tolerance * analytic)
        return ValidationResult(
            status="pass" if ok else "fail",
            details={
                "analytic_ber": analytic,
                "simulated_ber": report.ber_point,
                "signed_gap": gap,
                "ci95_reference": ci_ref,
                "pass_band": max(3.0 * ci_ref, tolerance * analytic),
            },
            report=report,
        )

    # Adaptive mode.
    if mode.budget.avg_snr != budget.avg_snr:
        raise ValueError("adaptive scheme was computed for a different SNR point")
    eff = spectral_efficiency(mode, params)
    analytic_ber = average_ber_adaptive(mode, params)
    mean_bits = 2.0 * eff
    if mean_bits <= 0.0 or analytic_ber is None:
        return ValidationResult(
            status="inconclusive",
            details={"reason": "outage-only operating point", "spectral_eff": eff},
            report=None,
        )
    max_bits = mode.orders[-1].bits
    symbols = 9.0 * max_bits / (tolerance ** 2 * mean_bits)  # throughput CI
    symbols = max(symbols, TARGET_ERRORS / (analytic_ber * mean_bits), 10 ** 6)
    if symbols > MAX_TOTAL_SYMBOLS:
        return ValidationResult(
            status="inconclusive",
            details={"reason": "required sample size exceeds the guard rail"},
            report=None,
        )
    blocks = max(1, math.ceil(symbols / symbols_per_block))
    config = SimConfig(
        blocks=blocks,
        symbols_per_block=symbols_per_block,
        seed=seed,
        mode=mode,
        channel=params,
        budget=budget,
    )
    report = run(config, workers=workers)
    sim_eff = 0.5 * report.throughput_bits_per_symbol
    eff_gap = sim_eff - eff
    ber_excess = report.ber_point - mode.target_ber
    ok_eff = abs(eff_gap) <= tolerance * eff
    ok_ber = report.ber_point <= mode.target_ber + report.ber_ci95
    return ValidationResult(
        status="pass" if (ok_eff and ok_ber) else "fail",
        details={
            "analytic_spectral_eff": eff,
            "simulated_spectral_eff": sim_eff,
            "spectral_eff_signed_gap": eff_gap,
            "analytic_ber": analytic_ber,
            "simulated_ber": report.ber_point,
            "target_ber": mode.target_ber,
            "ber_excess_over_target": ber_excess,
            "aggregate_law_is_approximation": params.n_paths > 1,
        },
        report=report,
    )

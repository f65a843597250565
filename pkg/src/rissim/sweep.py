"""Monte Carlo BER sweeps and theory curves.

Trials are grouped into fixed-size chunks.  Chunk ``c`` of grid point
``p`` draws from its own Philox stream keyed by ``(seed, p, c)``, chunks
are reduced in index order, and early stopping is decided on that ordered
reduction.  The output therefore depends only on the configuration, never
on how many workers evaluated the chunks.

Within a chunk the draw order is fixed (``H``, ``G``, codeword indices,
noise, then the optional random baseline phases and CSI errors), so
configurations that differ only in quantization or CSI quality see the
same channels, data and noise.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import math
import time

import numpy as np

from rissim import __version__, kernels
from rissim.analysis import CompositeStats, abep_bound
from rissim.channel import PathLossGeometry, complex_normal, path_loss_amplitude
from rissim.config import LinkConfig
from rissim.phase import quantize_angles
from rissim.transceiver import BerRecord, build_codebook

__all__ = ["SweepResult", "run_ber_sweep", "run_theory_curve", "run", "simulate_chunk",
           "chunk_rng", "link_amplitude"]

log = logging.getLogger(__name__)


@dataclass
class SweepResult:
    records: list[BerRecord] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def by_source(self, source: str) -> list[BerRecord]:
        return [r for r in self.records if r.source == source]


def chunk_rng(seed: int, point: int, chunk: int) -> np.random.Generator:
    """Counter-based generator for one (grid point, chunk) pair."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(point, chunk))
    return np.random.Generator(np.random.Philox(ss))


def link_amplitude(cfg: LinkConfig) -> float:
    if cfg.pathloss is None:
        return 1.0
    d1, d2, f_ghz = cfg.pathloss
    return path_loss_amplitude(PathLossGeometry(d1, d2, f_ghz * 1e9))


def _phases(cfg: LinkConfig, H, G, rng, n):
    if cfg.variant == "identity":
        return np.zeros((n, cfg.n_ris))
    if cfg.variant == "random":
        return rng.uniform(-math.pi, math.pi, (n, cfg.n_ris))
    phi_h, phi_g = kernels.cosine_angles(H, G, cfg.variant == "signed")
    if cfg.quantize_levels is not None:
        phi_h = quantize_angles(phi_h, cfg.quantize_levels)
        phi_g = quantize_angles(phi_g, cfg.quantize_levels)
    return -(phi_h + phi_g)


def simulate_chunk(cfg: LinkConfig, point: int, chunk: int, n: int) -> tuple[int, int]:
    """Run ``n`` independent channel uses at grid point ``point``.

    Returns
    -------
    (trials, bit_errors)
    """
    rng = chunk_rng(cfg.seed, point, chunk)
    book = build_codebook(cfg.scheme, cfg.tx, cfg.mod_order, cfg.modulation,
                          cfg.normalize_total_power)
    N0 = 10.0 ** (-cfg.esn0_db[point] / 10.0)
    amp = link_amplitude(cfg)

    H = complex_normal(rng, (n, cfg.n_ris, cfg.tx))
    G = complex_normal(rng, (n, cfg.n_ris, cfg.rx))
    idx = rng.integers(book.size, size=n)
    noise = complex_normal(rng, (n, cfg.rx), N0)
    if cfg.variant == "random":
        phases = _phases(cfg, H, G, rng, n)
    if cfg.sigma_e2 > 0:
        H_est = H + complex_normal(rng, H.shape, cfg.sigma_e2)
        G_est = G + complex_normal(rng, G.shape, cfg.sigma_e2)
    else:
        H_est, G_est = H, G
    if cfg.variant != "random":
        phases = _phases(cfg, H_est, G_est, rng, n)

    C = kernels.compose(G, phases, H)
    C_det = C if cfg.sigma_e2 == 0 else kernels.compose(G_est, phases, H_est)
    x = book.vectors[idx]
    y = amp * np.matmul(C, x[:, :, None])[:, :, 0]
    if not cfg.noiseless:
        y += noise
    detected = kernels.ml_detect(y, amp * C_det if amp != 1.0 else C_det, book.vectors)
    errors = int(book.hamming_table()[idx, detected].sum())
    return n, errors


def _chunk_task(args):
    cfg, point, chunk, n = args
    return simulate_chunk(cfg, point, chunk, n)


def _chunk_sizes(cfg: LinkConfig):
    c = 0
    while c * cfg.chunk_trials < cfg.max_trials:
        yield c, min(cfg.chunk_trials, cfg.max_trials - c * cfg.chunk_trials)
        c += 1


def _simulate_point(cfg: LinkConfig, point: int, pool) -> tuple[int, int]:
    trials = 0
    errors = 0
    chunks = _chunk_sizes(cfg)
    wave = max(cfg.workers, 1) if pool is not None else 1
    while True:
        batch = []
        for _ in range(wave):
            nxt = next(chunks, None)
            if nxt is None:
                break
            batch.append((cfg, point, nxt[0], nxt[1]))
        if not batch:
            return trials, errors
        if pool is None:
            results = map(_chunk_task, batch)
        else:
            results = pool.map(_chunk_task, batch)
        # ordered reduction; chunks past the stopping point are discarded
        for n, e in results:
            trials += n
            errors += e
            if errors >= cfg.min_bit_errors or trials >= cfg.max_trials:
                return trials, errors


def _record(cfg: LinkConfig, esn0: float, source: str, ber: float,
            trials=None, bit_errors=None) -> BerRecord:
    d1 = d2 = None
    if cfg.pathloss is not None:
        d1, d2 = cfg.pathloss[0], cfg.pathloss[1]
    return BerRecord(
        scheme=cfg.scheme, tx=cfg.tx, rx=cfg.rx, n_ris=cfg.n_ris, mod_order=cfg.mod_order,
        variant=cfg.variant, esn0_db=esn0, source=source, ber=ber, trials=trials,
        bit_errors=bit_errors, quant_levels=cfg.quantize_levels, sigma_e2=cfg.sigma_e2,
        d1=d1, d2=d2, config_hash=cfg.config_hash())


def _provenance(cfg: LinkConfig, wall: float) -> dict:
    return {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "version": f"rissim {__version__} ({kernels.BACKEND} kernels)",
        "wall_time_s": wall,
    }


def run_ber_sweep(cfg: LinkConfig) -> SweepResult:
    """Simulated BER at every grid point of ``cfg``."""
    t0 = time.perf_counter()
    kappa = build_codebook(cfg.scheme, cfg.tx, cfg.mod_order, cfg.modulation,
                           cfg.normalize_total_power).kappa
    records = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for p, esn0 in enumerate(cfg.esn0_db):
            trials, errors = _simulate_point(cfg, p, pool)
            ber = errors / (trials * kappa)
            log.info("%s Es/N0=%g dB: %d errors in %d trials, BER=%.3e",
                     cfg.scheme, esn0, errors, trials, ber)
            records.append(_record(cfg, esn0, "simulated", ber, trials, errors))
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(records, _provenance(cfg, time.perf_counter() - t0))


def run_theory_curve(cfg: LinkConfig) -> SweepResult:
    """Union-bound ABEP at every grid point, with ``mu`` from the antenna-count formula."""
    t0 = time.perf_counter()
    book = build_codebook(cfg.scheme, cfg.tx, cfg.mod_order, cfg.modulation,
                          cfg.normalize_total_power)
    stats = CompositeStats.from_formula(cfg.tx, cfg.rx, cfg.n_ris)
    amp2 = link_amplitude(cfg) ** 2
    records = []
    for esn0 in cfg.esn0_db:
        # path loss scales the signal power, equivalent to N0 / amp^2
        N0 = 10.0 ** (-esn0 / 10.0) / amp2
        ber = abep_bound(book, stats, N0, cfg.quadrature_order)
        records.append(_record(cfg, esn0, "theory", ber))
    return SweepResult(records, _provenance(cfg, time.perf_counter() - t0))


def run(cfg: LinkConfig) -> SweepResult:
    """Simulation and/or theory as selected by the config flags."""
    t0 = time.perf_counter()
    records = []
    if cfg.simulate:
        records += run_ber_sweep(cfg).records
    if cfg.theory:
        records += run_theory_curve(cfg).records
    return SweepResult(records, _provenance(cfg, time.perf_counter() - t0))

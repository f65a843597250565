"""Constellations, RIS-MIMO / RIS-SM codebooks, AWGN and ML detection."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
import itertools
import math

import numpy as np

from rissim import kernels
from rissim.channel import complex_normal

__all__ = [
    "SCHEMES",
    "Constellation",
    "Codebook",
    "BerRecord",
    "build_codebook",
    "transmit",
    "ml_detect",
    "count_bit_errors",
]

SCHEMES = ("mimo", "sm")


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - b)) & 1 for b in range(width)]


def _gray(n: int) -> int:
    return n ^ (n >> 1)


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy symbols with Gray bit labels (``labels[k]`` belongs to ``points[k]``)."""

    points: np.ndarray
    labels: np.ndarray

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    @classmethod
    def psk(cls, M: int) -> "Constellation":
        """M-PSK with point ``k`` at angle ``2 pi k / M`` and label ``gray(k)``."""
        if not _is_pow2(M) or M < 2:
            raise ValueError(f"PSK order must be a power of two >= 2, got {M}")
        k = np.arange(M)
        points = np.exp(2j * np.pi * k / M)
        # exact values on the axes keep BPSK/QPSK free of 1e-16 residue
        points = np.round(points.real, 15) + 1j * np.round(points.imag, 15)
        width = int(math.log2(M))
        labels = np.array([_bits(_gray(int(i)), width) for i in k], dtype=np.int8)
        return cls(points, labels)

    @classmethod
    def qam(cls, M: int) -> "Constellation":
        """Square M-QAM, Gray coded independently on the I and Q axes."""
        side = math.isqrt(M)
        if side * side != M or not _is_pow2(M) or M < 4:
            raise ValueError(f"square QAM needs M = 4, 16, 64, ...; got {M}")
        half = int(math.log2(side))
        amps = 2 * np.arange(side) - (side - 1)
        pts, labs = [], []
        for i, q in itertools.product(range(side), range(side)):
            pts.append(amps[i] + 1j * amps[q])
            labs.append(_bits(_gray(i), half) + _bits(_gray(q), half))
        points = np.array(pts) / np.sqrt(2 * (M - 1) / 3)
        return cls(points, np.array(labs, dtype=np.int8))


@dataclass(frozen=True)
class Codebook:
    """All candidate transmit vectors with their bit labels.

    ``vectors`` has shape ``(K, Tx)`` and ``labels`` shape ``(K, kappa)``.
    """

    scheme: str
    vectors: np.ndarray
    labels: np.ndarray

    @property
    def size(self) -> int:
        return len(self.vectors)

    @property
    def kappa(self) -> int:
        return self.labels.shape[1]

    @property
    def tx(self) -> int:
        return self.vectors.shape[1]

    @cached_property
    def _hamming(self) -> np.ndarray:
        table = (self.labels[:, None, :] != self.labels[None, :, :]).sum(axis=-1)
        table.setflags(write=False)
        return table

    def hamming_table(self) -> np.ndarray:
        """``(K, K)`` matrix of label Hamming distances."""
        return self._hamming


@dataclass
class BerRecord:
    """One simulated or theoretical BER point."""

    scheme: str
    tx: int
    rx: int
    n_ris: int
    mod_order: int
    variant: str
    esn0_db: float
    source: str
    ber: float
    trials: int | None = None
    bit_errors: int | None = None
    quant_levels: int | None = None
    sigma_e2: float = 0.0
    d1: float | None = None
    d2: float | None = None
    config_hash: str | None = None

    @property
    def kappa(self) -> int:
        m = int(math.log2(self.mod_order))
        if self.scheme == "sm":
            return int(math.log2(self.tx)) + m
        return self.tx * m


def build_codebook(scheme: str, Tx: int, M: int, modulation: str = "psk",
                   normalize_total_power: bool = False) -> Codebook:
    """Enumerate every transmit vector of a RIS-MIMO or RIS-SM scheme.

    RIS-MIMO sends one symbol per antenna (``M**Tx`` vectors, antenna 0 is
    the most significant label digit).  RIS-SM activates one antenna
    (``Tx*M`` vectors, antenna index major); its label is the antenna index
    in natural binary followed by the Gray symbol label.

    ``normalize_total_power`` divides RIS-MIMO vectors by ``sqrt(Tx)``;
    SM vectors already carry one symbol of energy and are left alone.
    """
    return _build_codebook(scheme, int(Tx), int(M), modulation, bool(normalize_total_power))


@lru_cache(maxsize=64)
def _build_codebook(scheme, Tx, M, modulation, normalize_total_power):
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if Tx < 1:
        raise ValueError(f"Tx must be positive, got {Tx}")
    if modulation == "psk":
        const = Constellation.psk(M)
    elif modulation == "qam":
        const = Constellation.qam(M)
    else:
        raise ValueError(f"unknown modulation {modulation!r}")

    if scheme == "mimo":
        combos = list(itertools.product(range(M), repeat=Tx))
        vectors = const.points[np.array(combos)]
        labels = const.labels[np.array(combos)].reshape(len(combos), -1)
        if normalize_total_power:
            vectors = vectors / math.sqrt(Tx)
    else:
        if not _is_pow2(Tx) or Tx < 2:
            raise ValueError(f"spatial modulation needs a power-of-two Tx >= 2, got {Tx}")
        width = int(math.log2(Tx))
        vectors = np.zeros((Tx * M, Tx), dtype=complex)
        labels = []
        for a in range(Tx):
            for s in range(M):
                vectors[a * M + s, a] = const.points[s]
                labels.append(_bits(a, width) + list(const.labels[s]))
        labels = np.array(labels, dtype=np.int8)
    vectors = np.ascontiguousarray(vectors, dtype=np.complex128)
    vectors.setflags(write=False)
    labels.setflags(write=False)
    return Codebook(scheme, vectors, labels)


def transmit(x, C, amplitude: float, N0: float, rng: np.random.Generator | None = None,
             noiseless: bool = False) -> np.ndarray:
    """Received vector ``amplitude * C @ x + n`` with ``n ~ CN(0, N0 I)``."""
    x = np.asarray(x, dtype=complex)
    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or x.shape != (C.shape[1],):
        raise ValueError(f"cannot apply a {C.shape} channel to a vector of shape {x.shape}")
    y = amplitude * (C @ x)
    if noiseless:
        return y
    if not N0 > 0:
        raise ValueError(f"N0 must be positive, got {N0}")
    if rng is None:
        raise ValueError("a noisy transmission needs an rng")
    return y + complex_normal(rng, y.shape, N0)


def ml_detect(y, C_est, book: Codebook) -> int:
    """Index of the codebook vector minimizing ``|y - C_est x|^2`` (lowest index on ties)."""
    y = np.asarray(y, dtype=complex)
    C_est = np.asarray(C_est, dtype=complex)
    if book.size == 0:
        raise ValueError("empty codebook")
    return int(kernels.ml_detect(y[None], C_est[None], book.vectors)[0])


def count_bit_errors(true_index: int, detected_index: int, book: Codebook) -> int:
    """Hamming distance between the labels of two codebook entries."""
    return int(np.count_nonzero(book.labels[true_index] != book.labels[detected_index]))

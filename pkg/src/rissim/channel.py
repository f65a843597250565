"""Fading channels, CSI errors, path loss and the composite RIS channel.

The transmitter-to-RIS matrix ``H`` has shape ``(N, Tx)`` and the
RIS-to-receiver matrix ``G`` has shape ``(N, Rx)``.  The end-to-end channel
seen by the receiver is ``C = G^H diag(exp(j*phases)) H`` with shape
``(Rx, Tx)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

from rissim import kernels

__all__ = [
    "SPEED_OF_LIGHT",
    "ChannelRealization",
    "PathLossGeometry",
    "complex_normal",
    "sample_rayleigh",
    "apply_csi_error",
    "compose_channel",
    "inverse_path_loss",
    "path_loss_amplitude",
]

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ChannelRealization:
    """One block of Tx->RIS and RIS->Rx fading, with optional estimates."""

    H: np.ndarray
    G: np.ndarray
    H_est: np.ndarray | None = None
    G_est: np.ndarray | None = None

    def __post_init__(self):
        if self.H.ndim != 2 or self.G.ndim != 2:
            raise ValueError("H and G must be 2-D")
        if self.H.shape[0] != self.G.shape[0]:
            raise ValueError(
                f"H has {self.H.shape[0]} rows but G has {self.G.shape[0]}; "
                "both must have one row per reflector")
        if self.H_est is not None and self.H_est.shape != self.H.shape:
            raise ValueError("H_est shape differs from H")
        if self.G_est is not None and self.G_est.shape != self.G.shape:
            raise ValueError("G_est shape differs from G")

    @property
    def n_ris(self) -> int:
        return self.H.shape[0]

    @property
    def tx(self) -> int:
        return self.H.shape[1]

    @property
    def rx(self) -> int:
        return self.G.shape[1]

    @property
    def has_estimates(self) -> bool:
        return self.H_est is not None and self.G_est is not None


@dataclass(frozen=True)
class PathLossGeometry:
    """Distances (m) and carrier frequency (Hz) of the RIS link."""

    d1: float
    d2: float
    frequency: float = 2.4e9
    wavelength_override: float | None = None

    def __post_init__(self):
        if not (self.d1 > 0 and self.d2 > 0):
            raise ValueError(f"distances must be positive, got d1={self.d1}, d2={self.d2}")
        if not self.frequency > 0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        if self.wavelength_override is not None and not self.wavelength_override > 0:
            raise ValueError("wavelength must be positive")

    @property
    def wavelength(self) -> float:
        if self.wavelength_override is not None:
            return self.wavelength_override
        return SPEED_OF_LIGHT / self.frequency

    @classmethod
    def from_wavelength(cls, d1: float, d2: float, wavelength: float) -> "PathLossGeometry":
        return cls(d1, d2, SPEED_OF_LIGHT / wavelength, wavelength_override=wavelength)


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples, real/imag each N(0, variance/2)."""
    scale = math.sqrt(variance / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    out = re + 1j * im
    out *= scale
    return out


def sample_rayleigh(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a ``rows x cols`` matrix of i.i.d. CN(0, 1) entries."""
    if rows < 1 or cols < 1:
        raise ValueError(f"dimensions must be positive, got ({rows}, {cols})")
    return complex_normal(rng, (rows, cols))


def apply_csi_error(chan: ChannelRealization, sigma_e2: float,
                    rng: np.random.Generator) -> ChannelRealization:
    """Attach noisy estimates ``H + E_t`` and ``G + E_r`` with CN(0, sigma_e2) errors.

    With ``sigma_e2 == 0`` the estimates are exact copies and no random
    numbers are consumed.
    """
    if sigma_e2 < 0:
        raise ValueError(f"sigma_e2 must be nonnegative, got {sigma_e2}")
    if sigma_e2 == 0:
        return replace(chan, H_est=chan.H.copy(), G_est=chan.G.copy())
    H_est = chan.H + complex_normal(rng, chan.H.shape, sigma_e2)
    G_est = chan.G + complex_normal(rng, chan.G.shape, sigma_e2)
    return replace(chan, H_est=H_est, G_est=G_est)


def compose_channel(G: np.ndarray, phases, H: np.ndarray) -> np.ndarray:
    """Composite channel ``G^H diag(exp(j*phases)) H``.

    Parameters
    ----------
    G : (N, Rx) complex array
    phases : PhaseConfig or (N,) real array
        Reflector phase shifts in radians.
    H : (N, Tx) complex array

    Returns
    -------
    C : (Rx, Tx) complex array
    """
    phases = np.asarray(getattr(phases, "phases", phases), dtype=float)
    G = np.asarray(G, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if G.ndim != 2 or H.ndim != 2 or phases.ndim != 1:
        raise ValueError("expected G (N, Rx), H (N, Tx) and phases (N,)")
    if not (G.shape[0] == H.shape[0] == phases.shape[0]):
        raise ValueError(
            f"reflector count mismatch: G {G.shape}, H {H.shape}, phases {phases.shape}")
    return kernels.compose(G[None], phases[None], H[None])[0]


def inverse_path_loss(geom: PathLossGeometry) -> float:
    """Linear power gain ``1 / P_L = lambda^4 / (256 pi^2 d1^2 d2^2)``."""
    lam = geom.wavelength
    return lam ** 4 / (256.0 * math.pi ** 2 * geom.d1 ** 2 * geom.d2 ** 2)


def path_loss_amplitude(geom: PathLossGeometry) -> float:
    """Amplitude gain ``sqrt(1 / P_L)`` applied to the noiseless received signal."""
    return math.sqrt(inverse_path_loss(geom))

"""RIS phase configurations.

The cosine-similarity rule sets each reflector independently: the angle
between ``h_i`` (row ``i`` of ``H``) and its entrywise modulus, plus the
same angle for ``g_i^H`` (the conjugated row ``i`` of ``G``), is removed
by the reflector, ``phi_i = -(phi_i^h + phi_i^g)``.

Two variants are provided.  ``verbatim`` uses the plain arccos, whose
range is ``[0, pi]`` so negative channel phases are not undone.
``signed`` restores the sign of each angle from the imaginary part of the
inner product, which co-phases SISO links exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from rissim import kernels

__all__ = [
    "VARIANTS",
    "DegenerateInputError",
    "PhaseConfig",
    "QuantizerSpec",
    "cosine_similarity_angle",
    "adapt_phases",
    "quantize_angles",
    "quantize_phases",
    "gain_upper_bound",
    "baseline_phases",
]

VARIANTS = ("verbatim", "signed")


class DegenerateInputError(ValueError):
    """A zero-norm vector was passed where an angle is undefined."""


@dataclass(frozen=True)
class PhaseConfig:
    """Reflector phase shifts ``phases`` (radians, length N).

    ``component_angles`` holds the ``(phi^h, phi^g)`` pairs as an ``(N, 2)``
    array when the configuration came from :func:`adapt_phases`.
    """

    phases: np.ndarray
    component_angles: np.ndarray | None = None
    variant: str = "verbatim"
    quantization: int | None = None

    def __post_init__(self):
        if self.phases.ndim != 1:
            raise ValueError("phases must be a 1-D array")
        if self.component_angles is not None and self.component_angles.shape != (len(self.phases), 2):
            raise ValueError("component_angles must have shape (N, 2)")

    @property
    def n_ris(self) -> int:
        return len(self.phases)

    def reflection_matrix(self) -> np.ndarray:
        """The diagonal matrix ``diag(exp(j*phases))``."""
        return np.diag(np.exp(1j * self.phases))


@dataclass(frozen=True)
class QuantizerSpec:
    """``levels`` uniform discrete angles ``{0, step, ..., (levels-1)*step}``, ``step = pi/levels``."""

    levels: int

    def __post_init__(self):
        if int(self.levels) != self.levels or self.levels < 1:
            raise ValueError(f"level count must be a positive integer, got {self.levels}")

    @property
    def step(self) -> float:
        return math.pi / self.levels

    @property
    def values(self) -> np.ndarray:
        return np.arange(self.levels) * self.step


def cosine_similarity_angle(u, v) -> float:
    """Angle ``arccos(Re<u, v> / (|u| |v|))`` in ``[0, pi]``.

    ``<u, v> = sum(u * conj(v))``.  The cosine is clamped to ``[-1, 1]``.

    Raises
    ------
    DegenerateInputError
        If either vector has zero norm.
    """
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu2 = np.vdot(u, u).real
    nv2 = np.vdot(v, v).real
    if nu2 == 0 or nv2 == 0:
        raise DegenerateInputError("cosine similarity of a zero-norm vector")
    # one square root keeps <u, u> / |u|^2 exactly 1
    c = np.vdot(v, u).real / np.sqrt(nu2 * nv2)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def adapt_phases(H, G, variant: str = "verbatim") -> PhaseConfig:
    """Cosine-similarity phase adaptation for one channel block.

    Parameters
    ----------
    H : (N, Tx) complex array
        Tx->RIS channel (true or estimated).
    G : (N, Rx) complex array
        RIS->Rx channel (true or estimated).
    variant : {"verbatim", "signed"}

    Returns
    -------
    PhaseConfig
        Phases and per-reflector component angles.  A reflector whose
        ``h_i`` or ``g_i`` is all zero gets a zero component for it.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    H = np.asarray(H, dtype=np.complex128)
    G = np.asarray(G, dtype=np.complex128)
    if H.ndim != 2 or G.ndim != 2 or H.shape[0] != G.shape[0]:
        raise ValueError(f"expected H (N, Tx) and G (N, Rx), got {H.shape} and {G.shape}")
    phi_h, phi_g = kernels.cosine_angles(H[None], G[None], variant == "signed")
    comp = np.empty((H.shape[0], 2))
    comp[:, 0] = phi_h[0]
    comp[:, 1] = phi_g[0]
    return PhaseConfig(-(phi_h[0] + phi_g[0]), comp, variant)


def quantize_angles(angles, levels: int) -> np.ndarray:
    """Round angles to the nearest of ``{0, ..., (levels-1)*pi/levels}``, ties downward.

    Negative angles (signed variant) are quantized by magnitude and keep
    their sign.
    """
    a = np.asarray(angles, dtype=float)
    mag = np.abs(a)
    k = np.clip(np.ceil(mag * levels / math.pi - 0.5), 0, levels - 1)
    return np.copysign(k * (math.pi / levels), a)


def quantize_phases(cfg: PhaseConfig, spec: QuantizerSpec) -> PhaseConfig:
    """Quantize the component angles of ``cfg`` and recompose the phases."""
    if cfg.component_angles is None:
        raise ValueError("quantization needs component angles; use a config from adapt_phases")
    comp = quantize_angles(cfg.component_angles, spec.levels)
    return PhaseConfig(-(comp[:, 0] + comp[:, 1]), comp, cfg.variant, spec.levels)


def gain_upper_bound(H, G):
    """Triangle-inequality bounds on the composite channel gain.

    Returns
    -------
    total : float
        ``sum_i |g_i| |h_i|``, a bound on the Frobenius norm of ``C``.
    per_entry : (Rx, Tx) array
        ``sum_i |g_{k,i}| |h_{i,l}|``, a bound on ``|c_{k,l}|``.
    """
    H = np.asarray(H, dtype=complex)
    G = np.asarray(G, dtype=complex)
    total = float(np.sum(np.linalg.norm(G, axis=1) * np.linalg.norm(H, axis=1)))
    per_entry = np.abs(G).T @ np.abs(H)
    return total, per_entry


def baseline_phases(kind: str, N: int, rng: np.random.Generator | None = None) -> PhaseConfig:
    """Reference configurations: ``identity`` (all zero) or ``random`` (uniform on [-pi, pi])."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    if kind == "identity":
        return PhaseConfig(np.zeros(N), variant="identity")
    if kind == "random":
        if rng is None:
            raise ValueError("random baseline needs an rng")
        return PhaseConfig(rng.uniform(-math.pi, math.pi, N), variant="random")
    raise ValueError(f"unknown baseline {kind!r}")

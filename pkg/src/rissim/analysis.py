"""Semi-analytical BER engine.

Entries of the composite channel are modelled as independent
``CN(mu*N, N)`` variables, where ``mu`` depends only on the antenna counts.
For a pair ``(x, x_hat)`` with ``d = x - x_hat`` the ML decision metric
difference is ``Omega = |C d|^2 = z^H B z`` with ``z = vec(C^H)``, a
Gaussian quadratic form whose MGF is known in closed form.  The pairwise
error probability follows from Craig's form of the Q-function, and the
ABEP is bounded by the usual union sum over codebook pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy.special import erfc

from rissim import kernels
from rissim.channel import complex_normal
from rissim.transceiver import Codebook

__all__ = [
    "DEFAULT_QUADRATURE_ORDER",
    "SISO_VERBATIM_MU",
    "CompositeStats",
    "PepInstance",
    "MuEstimate",
    "mu_formula",
    "estimate_mu",
    "mu_statistics",
    "vec",
    "omega_quadratic_form",
    "mgf_quadratic_form",
    "pep",
    "cpep",
    "q_function",
    "abep_bound",
]

DEFAULT_QUADRATURE_ORDER = 64
MIN_QUADRATURE_ORDER = 8

# Single reflector, verbatim rule: E|h| = sqrt(pi)/2 per hop, and the
# uncancelled phase halves the mean of each hop.  (sqrt(pi)/2 * 1/2)^2.
SISO_VERBATIM_MU = math.pi / 16


def mu_formula(Tx: int, Rx: int) -> float:
    """Empirical per-reflector mean ``1.8 / ((1 + 2 Tx)(1 + 2 Rx))``."""
    if Tx < 1 or Rx < 1:
        raise ValueError(f"antenna counts must be positive, got Tx={Tx}, Rx={Rx}")
    return 1.8 / ((1 + 2 * Tx) * (1 + 2 * Rx))


@dataclass(frozen=True)
class MuEstimate:
    """Sample mean of the single-reflector composite channel entries."""

    mean: complex
    stderr_real: float
    stderr_imag: float
    trials: int


def mu_statistics(Tx: int, Rx: int, trials: int, rng: np.random.Generator,
                  variant: str = "verbatim", batch: int = 50_000) -> MuEstimate:
    """Monte Carlo mean of the entries of ``C`` with one reflector.

    Standard errors are computed from per-trial averages over the ``Rx*Tx``
    entries, so correlation between entries of one realization is accounted
    for.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    s = 0j
    s2_re = 0.0
    s2_im = 0.0
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        H = complex_normal(rng, (n, 1, Tx))
        G = complex_normal(rng, (n, 1, Rx))
        phi_h, phi_g = kernels.cosine_angles(H, G, variant == "signed")
        C = kernels.compose(G, -(phi_h + phi_g), H)
        per_trial = C.reshape(n, -1).mean(axis=1)
        s += per_trial.sum()
        s2_re += float(np.sum(per_trial.real ** 2))
        s2_im += float(np.sum(per_trial.imag ** 2))
        done += n
    mean = s / trials
    var_re = max(s2_re / trials - mean.real ** 2, 0.0) * trials / max(trials - 1, 1)
    var_im = max(s2_im / trials - mean.imag ** 2, 0.0) * trials / max(trials - 1, 1)
    return MuEstimate(complex(mean), math.sqrt(var_re / trials), math.sqrt(var_im / trials), trials)


def estimate_mu(Tx: int, Rx: int, trials: int, rng: np.random.Generator,
                variant: str = "verbatim") -> complex:
    """Sample mean of all entries of ``C`` at ``N = 1``; the real part estimates ``mu``."""
    if trials < 10_000:
        raise ValueError(f"need at least 1e4 trials for a meaningful estimate, got {trials}")
    return mu_statistics(Tx, Rx, trials, rng, variant).mean


@dataclass(frozen=True)
class CompositeStats:
    """Gaussian model of ``z = vec(C^H)``: mean ``mu*N*1``, covariance ``N*I``."""

    mu: float
    n_ris: int
    tx: int
    rx: int

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.n_ris < 1:
            raise ValueError(f"n_ris must be positive, got {self.n_ris}")

    @classmethod
    def from_formula(cls, Tx: int, Rx: int, N: int) -> "CompositeStats":
        return cls(mu_formula(Tx, Rx), N, Tx, Rx)

    @property
    def mean_vector(self) -> np.ndarray:
        return np.full(self.tx * self.rx, self.mu * self.n_ris, dtype=complex)

    @property
    def covariance_scale(self) -> float:
        return float(self.n_ris)

    @property
    def covariance(self) -> np.ndarray:
        return self.covariance_scale * np.eye(self.tx * self.rx)


@dataclass(frozen=True)
class PepInstance:
    """A codebook pair lifted to the quadratic-form setting.

    ``delta = d d^H`` with ``d = x - x_hat``.  ``eigvals``/``eigvecs`` are its
    Hermitian eigendecomposition, which is all the MGF needs.
    """

    delta: np.ndarray
    rx: int
    eigvals: np.ndarray = field(repr=False)
    eigvecs: np.ndarray = field(repr=False)

    @classmethod
    def from_pair(cls, x, x_hat, rx: int) -> "PepInstance":
        d = np.asarray(x, dtype=complex) - np.asarray(x_hat, dtype=complex)
        if not np.any(d):
            raise ValueError("x and x_hat must differ")
        return cls.from_delta(np.outer(d, d.conj()), rx)

    @classmethod
    def from_delta(cls, delta, rx: int) -> "PepInstance":
        delta = np.asarray(delta, dtype=complex)
        w, v = np.linalg.eigh(delta)
        w = np.clip(w, 0.0, None)
        return cls(delta, int(rx), w, v)

    @property
    def tx(self) -> int:
        return self.delta.shape[0]

    def B(self, ordering: str = "rowmajor") -> np.ndarray:
        """Kronecker lift: ``delta (x) I_Rx`` ("rowmajor", row-major vec) or ``I_Rx (x) delta`` ("colmajor")."""
        eye = np.eye(self.rx)
        if ordering == "rowmajor":
            return np.kron(self.delta, eye)
        if ordering == "colmajor":
            return np.kron(eye, self.delta)
        raise ValueError(f"unknown ordering {ordering!r}")


def vec(A, ordering: str = "colmajor") -> np.ndarray:
    """Stack a matrix into a vector; ``colmajor`` stacks columns, ``rowmajor`` stacks rows."""
    A = np.asarray(A)
    if ordering == "colmajor":
        return A.reshape(-1, order="F")
    if ordering == "rowmajor":
        return A.reshape(-1, order="C")
    raise ValueError(f"unknown ordering {ordering!r}")


def omega_quadratic_form(C, x, x_hat, ordering: str = "colmajor") -> float:
    """``vec(C^H)^H B vec(C^H)`` with the Kronecker lift matching ``ordering``."""
    C = np.asarray(C, dtype=complex)
    inst = PepInstance.from_pair(x, x_hat, C.shape[0])
    z = vec(C.conj().T, ordering)
    return float(np.vdot(z, inst.B(ordering) @ z).real)


def mgf_quadratic_form(s, stats: CompositeStats, inst: PepInstance):
    """MGF of ``z^H B z`` for ``z ~ CN(mu N 1, N I)``.

    ``exp(s zbar^H B (I - s N B)^{-1} zbar) / det(I - s N B)``, evaluated
    through the eigenvalues of ``delta``: each appears ``Rx`` times in
    ``B``, and ``zbar`` projects onto the eigenvectors only through the
    all-ones vector of length ``Tx``.  ``s`` may be an array.
    """
    if inst.tx != stats.tx or inst.rx != stats.rx:
        raise ValueError("instance and statistics have different dimensions")
    s = np.asarray(s, dtype=float)
    N = stats.covariance_scale
    lam = inst.eigvals
    proj = np.abs(inst.eigvecs.conj().T @ np.ones(inst.tx)) ** 2
    denom = 1.0 - np.multiply.outer(s, lam) * N
    if np.any(denom <= 0):
        raise ValueError("I - s C_z B is singular or indefinite at this s")
    quad = (stats.mu * N) ** 2 * inst.rx * np.sum(proj * lam / denom, axis=-1)
    log_det = inst.rx * np.sum(np.log(denom), axis=-1)
    return np.exp(s * quad - log_det)


@lru_cache(maxsize=16)
def _craig_nodes(order: int):
    """Gauss-Legendre nodes/weights on (0, pi/2)."""
    t, w = np.polynomial.legendre.leggauss(order)
    theta = (t + 1.0) * (math.pi / 4)
    return theta, w * (math.pi / 4)


def pep(x, x_hat, stats: CompositeStats, N0: float,
        quadrature_order: int = DEFAULT_QUADRATURE_ORDER) -> float:
    """Unconditional pairwise error probability ``P(x -> x_hat)``.

    ``(1/pi) int_0^{pi/2} M(-1 / (4 N0 sin^2 theta)) dtheta`` by
    Gauss-Legendre quadrature.
    """
    return _pep(PepInstance.from_pair(x, x_hat, stats.rx), stats, N0, quadrature_order)


def _pep(inst: PepInstance, stats: CompositeStats, N0: float, order: int) -> float:
    if order < MIN_QUADRATURE_ORDER:
        raise ValueError(f"quadrature order must be at least {MIN_QUADRATURE_ORDER}, got {order}")
    if not N0 > 0:
        raise ValueError(f"N0 must be positive, got {N0}")
    theta, w = _craig_nodes(order)
    s = -1.0 / (4.0 * N0 * np.sin(theta) ** 2)
    return float(np.dot(w, mgf_quadratic_form(s, stats, inst)) / math.pi)


def q_function(x):
    """Gaussian tail ``Q(x) = erfc(x / sqrt 2) / 2``."""
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0))


def cpep(x, x_hat, C, N0: float) -> float:
    """Conditional PEP ``Q(sqrt(|C (x - x_hat)|^2 / (2 N0)))``."""
    d = np.asarray(x, dtype=complex) - np.asarray(x_hat, dtype=complex)
    omega = float(np.sum(np.abs(np.asarray(C) @ d) ** 2))
    return float(q_function(math.sqrt(omega / (2.0 * N0))))


def abep_bound(book: Codebook, stats: CompositeStats, N0: float,
               quadrature_order: int = DEFAULT_QUADRATURE_ORDER) -> float:
    """Union bound ``(1/(kappa 2^kappa)) sum_x sum_{x_hat != x} P(x -> x_hat) e(x, x_hat)``.

    Not clipped; at low SNR it can exceed one.
    """
    if book.size < 2:
        raise ValueError("union bound needs at least two codewords")
    dist = book.hamming_table()
    total = 0.0
    cache = {}
    for i in range(book.size):
        for j in range(book.size):
            if i == j or dist[i, j] == 0:
                continue
            d = book.vectors[i] - book.vectors[j]
            # PEP depends on d only through |d|^2 and |sum d|^2
            key = (round(float(np.vdot(d, d).real), 12), round(float(abs(d.sum()) ** 2), 12))
            if key not in cache:
                inst = PepInstance.from_pair(book.vectors[i], book.vectors[j], stats.rx)
                cache[key] = _pep(inst, stats, N0, quadrature_order)
            total += cache[key] * dist[i, j]
    return total / (book.kappa * 2 ** book.kappa)

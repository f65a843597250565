"""Pure numpy implementations of the batched hot loops.

Used when the compiled ``_ckernels`` extension is unavailable or when
``RISSIM_BACKEND=python`` is set.  Signatures match the extension exactly.
"""

import numpy as np


def _angles(num, energy, imag, signed):
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = num / energy
    out = np.arccos(np.clip(ratio, -1.0, 1.0))
    out[energy == 0.0] = 0.0
    if signed:
        out[imag < 0.0] *= -1.0
    return out


def cosine_angles(H, G, signed=False):
    """Per-reflector angles between each channel vector and its modulus vector.

    Parameters
    ----------
    H : (B, N, Tx) complex array
    G : (B, N, Rx) complex array
        The RIS->receiver matrix; its rows are conjugated (``g_i^H``)
        before the angle is taken.
    signed : bool
        If True, each angle carries the sign of the imaginary part of the
        inner product (zero counts as positive).

    Returns
    -------
    phi_h, phi_g : (B, N) float arrays
    """
    H = np.asarray(H, dtype=np.complex128)
    G = np.asarray(G, dtype=np.complex128)
    if G.shape[:2] != H.shape[:2]:
        raise ValueError("H and G batch/reflector dimensions differ")
    mh = np.abs(H)
    mg = np.abs(G)
    phi_h = _angles((H.real * mh).sum(-1), (mh * mh).sum(-1),
                    (H.imag * mh).sum(-1), signed)
    # conj(G): real part unchanged, imaginary part flips sign
    phi_g = _angles((G.real * mg).sum(-1), (mg * mg).sum(-1),
                    -(G.imag * mg).sum(-1), signed)
    return phi_h, phi_g


def compose(G, phases, H):
    """Batched ``G^H diag(exp(j*phases)) H`` -> (B, Rx, Tx)."""
    G = np.asarray(G, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    phases = np.asarray(phases, dtype=np.float64)
    if G.shape[:2] != H.shape[:2] or phases.shape != H.shape[:2]:
        raise ValueError("G, phases and H batch/reflector dimensions differ")
    w = np.exp(1j * phases)
    return np.matmul(np.conj(G).transpose(0, 2, 1) * w[:, None, :], H)


def ml_detect(Y, C, X):
    """Exhaustive ML detection over the rows of ``X``.

    Parameters
    ----------
    Y : (B, Rx) complex array
    C : (B, Rx, Tx) complex array
    X : (K, Tx) complex array

    Returns
    -------
    (B,) int64 array of indices into ``X``; ties go to the lowest index.
    """
    Y = np.asarray(Y, dtype=np.complex128)
    C = np.asarray(C, dtype=np.complex128)
    X = np.asarray(X, dtype=np.complex128)
    if Y.shape != C.shape[:2] or X.shape[1] != C.shape[2]:
        raise ValueError("Y, C and X dimensions differ")
    diff = Y[:, :, None] - np.matmul(C, X.T)
    dist = (diff.real ** 2 + diff.imag ** 2).sum(axis=1)
    return dist.argmin(axis=1).astype(np.int64)

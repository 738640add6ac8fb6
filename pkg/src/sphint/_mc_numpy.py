"""Pure-numpy Monte-Carlo kernels (fallback when the C extension is absent).

Batched modified Gram-Schmidt over independent Gaussian blocks, and the
per-sample tilt exponents against a diagonal matrix. Arithmetic matches the
compiled kernel up to floating-point reduction order.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def orthonormalize_batch(z: np.ndarray) -> np.ndarray:
    """Orthonormalize the columns of each (n, m) block of z, shape (b, n, m).

    Modified Gram-Schmidt with positive normalization: the unique QR factor
    with positive R diagonal, so Gaussian input yields exactly Haar frames.
    Operates in place and returns z.
    """
    b, n, m = z.shape
    for i in range(m):
        v = z[:, :, i]
        for j in range(i):
            q = z[:, :, j]
            proj = np.einsum("bn,bn->b", q.conj(), v)
            v -= proj[:, None] * q
        norms = np.sqrt(np.einsum("bn,bn->b", v.conj(), v).real)
        v /= norms[:, None]
    return z


def exponents_diag(z: np.ndarray, eta: np.ndarray, thetas: np.ndarray, pref: float) -> np.ndarray:
    """Per-sample exponents pref * sum_i theta_i <e_i, diag(eta) e_i>.

    z: (b, n, m) Gaussian blocks, consumed in place; eta: (n,); thetas: (m,).
    """
    e = orthonormalize_batch(z)
    absq = (e.conj() * e).real
    quad = np.einsum("bnm,n->bm", absq, eta)
    return pref * (quad @ thetas)

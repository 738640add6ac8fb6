"""Finite-N samplers and Monte-Carlo estimators of spherical integrals.

Samplers: GOE/GUE, sharp sub-Gaussian Wigner variants (Rademacher,
uniform), Wishart, variance-profile Wigner, Haar orthonormal frames,
Dirichlet eigenprojection weights, Jacobi Gram matrices, and finite-rank
perturbed ensembles.

Estimators: ``mc_spherical`` averages exp((beta N / 2) sum theta_i
<e_i, X e_i>) over uniform frames with a streaming log-sum-exp (no overflow
for arbitrarily large exponents) and jackknife standard errors over 50
batches; ``mc_dirichlet_spherical`` is the rank-one shortcut that samples
only the Dirichlet weights of the eigenspace projections.

Estimates are deterministic given (seed, config): batch layout is a pure
function of the sample count, and reductions run in fixed index order. The
hot per-sample kernel (orthonormalization + diagonal quadratic form) is the
compiled extension when available, with a numpy fallback; see
``sphint._backend``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from ._backend import BACKEND, kernel
from .errors import DomainError, ShapeError
from .ldp import check_beta
from .spherical import DiscreteModel, ThetaSpec

__all__ = [
    "MCConfig",
    "MCEstimate",
    "FrameSample",
    "BACKEND",
    "sample_frame",
    "sample_dirichlet_weights",
    "sample_matrix",
    "mc_spherical",
    "mc_dirichlet_spherical",
    "sample_jacobi_gram",
    "perturbed_wigner_spectrum",
    "perturbed_wishart_spectrum",
    "dump_matrix",
    "load_matrix",
]

_JACKKNIFE_BATCHES = 50
_SUB_BATCH = 256  # fixed, so batch layout never depends on memory


@dataclass(frozen=True)
class MCConfig:
    n: int
    samples: int
    seed: int
    beta: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        check_beta(self.beta)


@dataclass(frozen=True)
class FrameSample:
    """Columns are k+l orthonormal vectors of dimension n."""

    vectors: np.ndarray

    def __post_init__(self):
        v = self.vectors
        gram = v.conj().T @ v
        off = gram - np.diag(np.diag(gram))
        if np.max(np.abs(off)) > 1e-10:
            raise DomainError("frame columns are not orthogonal to 1e-10")
        if np.max(np.abs(np.diag(gram).real - 1.0)) > 1e-12:
            raise DomainError("frame columns are not unit to 1e-12")


def _gaussian_blocks(rng: np.random.Generator, shape: tuple, beta: int) -> np.ndarray:
    if beta == 1:
        return rng.standard_normal(shape)
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)


def sample_frame(config: MCConfig, count: int) -> FrameSample:
    """count orthonormal vectors, Haar-invariant in distribution.

    Gram-Schmidt of independent Gaussian columns with positive
    normalization: the unique positive-diagonal-R QR factor, hence exactly
    the uniform law on frames.
    """
    if count > config.n:
        raise DomainError(f"count={count} exceeds n={config.n}")
    rng = np.random.default_rng(config.seed)
    z = _gaussian_blocks(rng, (1, config.n, count), config.beta)
    q = kernel.orthonormalize_batch(z)[0]
    return FrameSample(q)


def sample_dirichlet_weights(model: DiscreteModel, beta: int = 1, seed: int = 0) -> np.ndarray:
    """One draw of the eigenspace projection weights gamma.

    Dirichlet with parameters (beta/2) N_i via normalized Gamma variables;
    one weight per distinct eta of the model.
    """
    check_beta(beta)
    rng = np.random.default_rng(seed)
    shapes = (beta / 2.0) * np.asarray(model.multiplicities, dtype=float)
    g = rng.gamma(shape=shapes)
    return g / g.sum()


def sample_matrix(kind: str, n: int, seed: int = 0, beta: int = 1, alpha: float = None,
                  profile=None) -> np.ndarray:
    """One matrix with the library's variance normalization.

    kind: 'goe', 'gue', 'rademacher-wigner', 'uniform-wigner',
    'wishart' (needs alpha; returns the n x n (1/M) G G* with M = round(n/alpha)),
    or 'profile' (needs a VarianceProfile).

    Wigner variants scale entries by 1/sqrt(n) with E|X_ij|^2 = 1 off the
    diagonal and E|X_ii|^2 = 2 (beta=1) resp. 1 (beta=2); complex entries
    have independent real and imaginary parts.
    """
    rng = np.random.default_rng(seed)
    if kind in ("goe", "gue", "rademacher-wigner", "uniform-wigner"):
        if kind == "goe":
            beta_eff = 1
        elif kind == "gue":
            beta_eff = 2
        else:
            beta_eff = check_beta(beta)

        def draw(shape):
            if kind in ("goe", "gue"):
                return rng.standard_normal(shape)
            if kind == "rademacher-wigner":
                return rng.integers(0, 2, size=shape) * 2.0 - 1.0
            return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)

        if beta_eff == 1:
            x = np.triu(draw((n, n)), 1)
            x = x + x.T
            x[np.diag_indices(n)] = math.sqrt(2.0) * draw((n,))
        else:
            z = (draw((n, n)) + 1j * draw((n, n))) / math.sqrt(2.0)
            x = np.triu(z, 1)
            x = x + x.conj().T
            x[np.diag_indices(n)] = draw((n,))
        return x / math.sqrt(n)

    if kind == "wishart":
        if alpha is None or not (0 < alpha <= 1):
            raise DomainError("wishart sampling needs alpha in (0, 1]")
        m = int(round(n / alpha))
        g = _gaussian_blocks(rng, (n, m), check_beta(beta))
        return (g @ g.conj().T).real / m if beta == 1 else (g @ g.conj().T) / m

    if kind == "profile":
        if profile is None:
            raise DomainError("profile sampling needs a VarianceProfile")
        sizes = _block_sizes(profile.alpha, n)
        sigma = np.sqrt(np.repeat(np.repeat(profile.R, sizes, axis=0), sizes, axis=1))
        x = sample_matrix("goe" if beta == 1 else "gue", n, seed=seed, beta=beta)
        return sigma * x

    raise DomainError(f"unknown matrix kind {kind!r}")


def _block_sizes(alpha: np.ndarray, n: int) -> np.ndarray:
    raw = np.asarray(alpha) * n
    sizes = np.floor(raw).astype(int)
    rem = raw - sizes
    for idx in np.argsort(-rem)[: n - sizes.sum()]:
        sizes[idx] += 1
    if np.any(sizes == 0):
        raise DomainError("n too small for the profile's block weights")
    return sizes


# ---------------------------------------------------------------------------
# estimators


@dataclass(frozen=True)
class MCEstimate:
    """Streaming log-sum-exp estimate with a jackknife standard error."""

    estimate: float
    stderr: float
    samples: int
    batches: int

    def __float__(self):
        return self.estimate


def _batch_sizes(samples: int) -> list[int]:
    b = min(_JACKKNIFE_BATCHES, samples)
    base, extra = divmod(samples, b)
    return [base + (1 if i < extra else 0) for i in range(b)]


def _lse_pairs_to_estimate(pairs: list[tuple[float, float]], counts: list[int], n: int) -> MCEstimate:
    """Combine per-batch (max, sum exp(x - max)) pairs into estimate + jackknife stderr."""
    total = sum(counts)

    def lse(idx):
        ms = [pairs[i][0] for i in idx]
        m = max(ms)
        s = sum(pairs[i][1] * math.exp(pairs[i][0] - m) for i in idx)
        return m + math.log(s)

    full = (lse(range(len(pairs))) - math.log(total)) / n
    if len(pairs) < 2:
        return MCEstimate(full, math.nan, total, len(pairs))
    loo = []
    for b in range(len(pairs)):
        idx = [i for i in range(len(pairs)) if i != b]
        loo.append((lse(idx) - math.log(total - counts[b])) / n)
    loo = np.asarray(loo)
    nb = len(pairs)
    stderr = math.sqrt((nb - 1) / nb * np.sum((loo - loo.mean()) ** 2))
    return MCEstimate(full, stderr, total, nb)


def _batch_lse(expo: np.ndarray) -> tuple[float, float]:
    m = float(np.max(expo))
    return m, float(np.sum(np.exp(expo - m)))


def mc_spherical(matrix: np.ndarray, thetas: ThetaSpec, config: MCConfig) -> MCEstimate:
    """(1/N) log mean exp((beta N / 2) sum_i theta_i <e_i, X e_i>) over frames.

    X may be a 1-d array (diagonal, the fast compiled path) or a dense
    Hermitian matrix (batched quadratic forms; frames from the same seed are
    then identical across matrices, so perturbation bounds hold pathwise).
    Streaming log-sum-exp, jackknife stderr over 50 batches, deterministic
    given (seed, config).
    """
    mat = np.asarray(matrix)
    diag = mat.ndim == 1
    if diag and np.iscomplexobj(mat):
        if np.any(mat.imag != 0):
            raise DomainError("a diagonal (1-d) matrix must be real")
        mat = mat.real
    if not diag:
        if mat.shape[0] != mat.shape[1]:
            raise ShapeError("matrix must be square")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12 * max(1.0, float(np.max(np.abs(mat)))):
            raise DomainError("matrix must be Hermitian")
    n = mat.shape[0]
    if n != config.n:
        raise ShapeError(f"config.n={config.n} does not match matrix dimension {n}")
    th = np.asarray(thetas.all, dtype=float)
    m = th.size
    if m == 0:
        raise ShapeError("need at least one tilt")
    if m > n:
        raise DomainError("more tilts than dimensions")
    if np.all(th == 0.0):
        return MCEstimate(0.0, 0.0, config.samples, min(_JACKKNIFE_BATCHES, config.samples))

    pref = config.beta * n / 2.0
    eta = mat.astype(float) if diag else None
    rng = np.random.default_rng(config.seed)
    pairs, counts = [], []
    for bs in _batch_sizes(config.samples):
        chunks = []
        done = 0
        while done < bs:
            take = min(_SUB_BATCH, bs - done)
            z = _gaussian_blocks(rng, (take, n, m), config.beta)
            if diag:
                chunks.append(kernel.exponents_diag(z, eta, th, pref))
            else:
                e = kernel.orthonormalize_batch(z)
                xe = np.einsum("rs,bsm->brm", mat, e)
                quad = np.einsum("brm,brm->bm", e.conj(), xe).real
                chunks.append(pref * (quad @ th))
            done += take
        mx, s = _batch_lse(np.concatenate(chunks))
        pairs.append((mx, s))
        counts.append(bs)
    return _lse_pairs_to_estimate(pairs, counts, n)


def mc_dirichlet_spherical(model: DiscreteModel, theta: float, config: MCConfig) -> MCEstimate:
    """Rank-one estimator sampling only the Dirichlet projection weights.

    <e, X e> = sum eta_i gamma_i with gamma Dirichlet((beta/2) N_i), so the
    frame integral reduces to a K-dimensional one; same log-sum-exp and
    jackknife machinery as ``mc_spherical``, and the two agree within
    combined MC error.
    """
    n = model.n_total
    if n != config.n:
        raise ShapeError(f"config.n={config.n} does not match model size {n}")
    if theta == 0.0:
        return MCEstimate(0.0, 0.0, config.samples, min(_JACKKNIFE_BATCHES, config.samples))
    etas = np.asarray(model.etas)
    shapes = (config.beta / 2.0) * np.asarray(model.multiplicities, dtype=float)
    pref = config.beta * n / 2.0
    rng = np.random.default_rng(config.seed)
    pairs, counts = [], []
    for bs in _batch_sizes(config.samples):
        chunks = []
        done = 0
        while done < bs:
            take = min(_SUB_BATCH * 16, bs - done)
            g = rng.gamma(shape=shapes, size=(take, shapes.size))
            gamma = g / g.sum(axis=1, keepdims=True)
            chunks.append(pref * theta * (gamma @ etas))
            done += take
        mx, s = _batch_lse(np.concatenate(chunks))
        pairs.append((mx, s))
        counts.append(bs)
    return _lse_pairs_to_estimate(pairs, counts, n)


# binary matrix format: 16-byte header (magic "SPHI", u32 N, u32 dtype code,
# u32 reserved), then N*N row-major little-endian entries
_MAGIC = b"SPHI"
_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<c16")}


def dump_matrix(path, matrix: np.ndarray) -> None:
    """Write a square matrix in the library's binary format (float64/complex128)."""
    mat = np.asarray(matrix)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ShapeError("only square matrices are dumped")
    code = 1 if np.iscomplexobj(mat) else 0
    mat = np.ascontiguousarray(mat, dtype=_DTYPES[code])
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<III", mat.shape[0], code, 0))
        fh.write(mat.tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by ``dump_matrix``."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != _MAGIC:
            raise DomainError(f"{path}: not a matrix dump (bad magic)")
        n, code, _ = struct.unpack("<III", header[4:])
        if code not in _DTYPES:
            raise DomainError(f"{path}: unknown dtype code {code}")
        data = np.frombuffer(fh.read(), dtype=_DTYPES[code])
    if data.size != n * n:
        raise DomainError(f"{path}: payload has {data.size} entries, expected {n * n}")
    return data.reshape(n, n).copy()


def sample_jacobi_gram(L: int, M: int, k: int, beta: int = 1, seed: int = 0) -> np.ndarray:
    """Gram matrix of the top L-row block of a Haar (L+M) x k frame.

    0 <= Psi <= I; for k = 1 the scalar follows Beta(beta L/2, beta M/2).
    """
    check_beta(beta)
    if L + M < k:
        raise DomainError("need L + M >= k")
    cfg = MCConfig(n=L + M, samples=1, seed=seed, beta=beta)
    u = sample_frame(cfg, k).vectors
    u1 = u[:L, :]
    return u1.conj().T @ u1


def perturbed_wigner_spectrum(thetas_top, thetas_bottom, n: int, beta: int = 1,
                              seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Extreme eigenvalues of GOE/GUE plus a finite-rank diagonal tilt.

    Returns (top eigenvalues descending, bottom ascending), as many of each
    as there are tilts of that sign. Tilt vectors are canonical basis
    vectors; the Gaussian ensemble is rotation invariant so the spectrum law
    is that of Haar directions.
    """
    check_beta(beta)
    t_top = [float(t) for t in thetas_top]
    t_bot = [float(t) for t in thetas_bottom]
    if len(t_top) + len(t_bot) > 8:
        raise DomainError("finite-rank perturbations capped at rank 8")
    x = sample_matrix("goe" if beta == 1 else "gue", n, seed=seed, beta=beta)
    for i, t in enumerate(t_top):
        x[i, i] += t
    for j, t in enumerate(t_bot):
        x[n - 1 - j, n - 1 - j] += t
    ev = np.linalg.eigvalsh(x)
    return ev[::-1][: len(t_top)].copy(), ev[: len(t_bot)].copy()


def perturbed_wishart_spectrum(gammas, alpha: float, n: int, beta: int = 1,
                               seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Extreme eigenvalues of a Wishart matrix with spiked covariance.

    W = (1/M) Sigma^{1/2} G G* Sigma^{1/2}, Sigma = I + sum gamma_i e_i e_i*,
    G of shape n x M with M = round(n / alpha). Returns (top descending
    for the positive gammas, bottom ascending for the negative ones).
    """
    check_beta(beta)
    gam = [float(g) for g in gammas]
    if any(g <= -1 for g in gam):
        raise DomainError("each gamma must exceed -1")
    if len(gam) > 8:
        raise DomainError("finite-rank perturbations capped at rank 8")
    if not (0 < alpha <= 1):
        raise DomainError("alpha must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    m = int(round(n / alpha))
    g = _gaussian_blocks(rng, (n, m), beta)
    scale = np.ones(n)
    for i, gv in enumerate(gam):
        scale[i] = math.sqrt(1.0 + gv)
    w = (scale[:, None] * g) @ (scale[:, None] * g).conj().T / m
    ev = np.linalg.eigvalsh(w.real if beta == 1 else w)
    n_pos = sum(1 for gv in gam if gv > 0)
    n_neg = sum(1 for gv in gam if gv < 0)
    return ev[::-1][:n_pos].copy(), ev[:n_neg].copy()

"""Sampling and quadrature on spheres, great subspheres and Grassmannians.

All integrals against the Haar probability measure ``sigma`` on S^{n-1}
go through either a deterministic :class:`QuadratureGrid` (n <= 3) or
seeded Monte Carlo samples.  Randomness is derived from a single integer
seed through :func:`rng`, which keys a counter-based Philox generator so
every named stream is reproducible on its own.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "QuadratureGrid",
    "Subspace",
    "SplitDecomposition",
    "rng",
    "sphere_area",
    "ball_volume",
    "sample_sphere",
    "quadrature_grid",
    "fine_grid",
    "subsphere_grid",
    "sample_grassmannian",
    "split",
    "split_arrays",
    "split_density",
    "orthonormal_complement",
]


def rng(seed: int, *stream) -> np.random.Generator:
    """Independent generator for ``(seed, *stream)``.

    The stream labels (ints or strings) are hashed into the Philox counter
    key, so streams never overlap and do not depend on call order.
    """
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for s in stream:
        if isinstance(s, str):
            words.append(zlib.crc32(s.encode()))
        else:
            words.append(int(s) & 0xFFFFFFFF)
    ss = np.random.SeedSequence(words)
    return np.random.Generator(np.random.Philox(ss))


def sphere_area(n: int) -> float:
    """Surface area |S^{n-1}| of the unit sphere in R^n (|S^0| = 2)."""
    return float(2.0 * math.pi ** (n / 2.0) / math.exp(gammaln(n / 2.0)))


def ball_volume(n: int) -> float:
    """Volume |B_2^n| of the Euclidean unit ball."""
    return sphere_area(n) / n


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes on a sphere with nonnegative weights.

    ``weights`` sum to ``total`` (1 for the Haar probability measure,
    |S^{n-2}| for the unnormalized subsphere measure).  Product grids keep
    their factors in ``polar``/``azimuth`` so separable evaluators can skip
    the scattered-point path.
    """

    nodes: np.ndarray
    weights: np.ndarray
    total: float = 1.0
    polar: tuple | None = None
    azimuth: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.nodes.shape[1]

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def mean(self, values) -> float:
        return self.integrate(values) / self.total


@dataclass(frozen=True)
class Subspace:
    """Element of Gr(n, k) held as an orthonormal k-frame (rows)."""

    frame: np.ndarray

    @property
    def n(self) -> int:
        return self.frame.shape[1]

    @property
    def k(self) -> int:
        return self.frame.shape[0]

    def projector(self) -> np.ndarray:
        return self.frame.T @ self.frame


@dataclass(frozen=True)
class SplitDecomposition:
    """theta = s*u + sqrt(1 - s^2)*v with u in the plane, v in its complement."""

    s: float
    u: np.ndarray
    v: np.ndarray
    ubar: float

    def reconstruct(self) -> np.ndarray:
        return self.s * self.u + math.sqrt(max(0.0, 1.0 - self.s**2)) * self.v


def sample_sphere(n: int, count: int, seed: int) -> np.ndarray:
    """``count`` i.i.d. Haar-uniform unit vectors in R^n, shape (count, n)."""
    if n < 2:
        raise ValueError("sample_sphere needs n >= 2")
    if count < 1:
        raise ValueError("count must be positive")
    g = rng(seed, "sphere", n).standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _circle(m: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(m) / m


def quadrature_grid(n: int, resolution: int) -> QuadratureGrid:
    """Deterministic Haar quadrature on S^1 or S^2.

    n=2: ``resolution`` equispaced angles (exact for trigonometric
    polynomials of degree < resolution).  n=3: ``resolution`` Gauss-Legendre
    nodes in cos(polar) times ``2*resolution`` equispaced azimuths (exact for
    spherical polynomials of degree <= 2*resolution - 1).
    """
    if n not in (2, 3):
        raise ValueError("deterministic grids only for n <= 3; use Monte Carlo")
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    return fine_grid(n, resolution, 2 * resolution)


def fine_grid(n: int, n_polar: int, n_azimuth: int | None = None) -> QuadratureGrid:
    """Product grid with independent polar and azimuthal resolutions.

    For n=2 only ``n_polar`` is used (as the number of angles).
    """
    if n == 2:
        a = _circle(n_polar)
        nodes = np.column_stack([np.cos(a), np.sin(a)])
        w = np.full(n_polar, 1.0 / n_polar)
        return QuadratureGrid(nodes, w, 1.0, None, a)
    if n != 3:
        raise ValueError("deterministic grids only for n <= 3; use Monte Carlo")
    if n_azimuth is None:
        n_azimuth = 2 * n_polar
    x, wx = np.polynomial.legendre.leggauss(n_polar)
    phi = np.arccos(x)
    psi = _circle(n_azimuth)
    sp = np.sqrt(1.0 - x**2)
    nodes = np.empty((n_polar, n_azimuth, 3))
    nodes[..., 0] = sp[:, None] * np.cos(psi)[None, :]
    nodes[..., 1] = sp[:, None] * np.sin(psi)[None, :]
    nodes[..., 2] = x[:, None]
    w = (wx / 2.0)[:, None] * np.full(n_azimuth, 1.0 / n_azimuth)[None, :]
    return QuadratureGrid(
        nodes.reshape(-1, 3), w.ravel(), 1.0, (phi, x, wx / 2.0), psi
    )


def orthonormal_complement(vectors: np.ndarray) -> np.ndarray:
    """Rows spanning the orthogonal complement of the rows of ``vectors``."""
    vectors = np.atleast_2d(vectors)
    n = vectors.shape[1]
    q, _ = np.linalg.qr(np.vstack([vectors, np.eye(n)]).T)
    return q[:, vectors.shape[0] : n].T


def subsphere_grid(theta, resolution: int) -> QuadratureGrid:
    """Quadrature on the great subsphere S^{n-1} ∩ theta^⊥.

    Weights carry the unnormalized surface measure, summing to |S^{n-2}|.
    n=3 uses ``resolution`` equispaced points on the great circle; n=4 a
    product grid on the great 2-sphere; n>4 falls back to ``resolution**2``
    Monte Carlo points seeded by the resolution.
    """
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    n = theta.size
    if n == 2:
        raise ValueError("subsphere is two antipodal points; handled directly")
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    basis = orthonormal_complement(theta[None, :])
    total = sphere_area(n - 1)
    if n == 3:
        a = _circle(resolution)
        local = np.column_stack([np.cos(a), np.sin(a)])
        w = np.full(resolution, total / resolution)
    elif n == 4:
        g = fine_grid(3, resolution, 2 * resolution)
        local, w = g.nodes, g.weights * total
    else:
        local = sample_sphere(n - 1, resolution**2, seed=resolution)
        w = np.full(local.shape[0], total / local.shape[0])
    return QuadratureGrid(local @ basis, w, total)


def sample_grassmannian(n: int, k: int, count: int, seed: int) -> list[Subspace]:
    """Haar-random k-dimensional subspaces of R^n (QR of Gaussian matrices)."""
    frames = sample_grassmannian_frames(n, k, count, seed)
    return [Subspace(f) for f in frames]


def sample_grassmannian_frames(n: int, k: int, count: int, seed: int) -> np.ndarray:
    """Array form of :func:`sample_grassmannian`, shape (count, k, n)."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= n-1, got k={k}, n={n}")
    g = rng(seed, "grassmannian", n, k).standard_normal((count, n, k))
    q, r = np.linalg.qr(g)
    # fix column signs so the map Gaussian -> frame is Haar-equivariant
    q = q * np.sign(np.diagonal(r, axis1=1, axis2=2))[:, None, :]
    return np.transpose(q, (0, 2, 1))


def split_arrays(theta: np.ndarray, plane=None):
    """Vectorized split of unit vectors against a 2-plane.

    ``plane`` is a (2, n) orthonormal pair; default span(e1, e2).  Returns
    ``(s, u, v, ubar)`` with ``u`` (m, n), ``v`` (m, n) and ``ubar`` the
    angle of u measured from the first plane vector, in [0, 2pi).
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    m, n = theta.shape
    if plane is None:
        plane = np.eye(n)[:2]
    plane = np.asarray(plane, dtype=float)
    c = theta @ plane.T
    s = np.minimum(np.hypot(c[:, 0], c[:, 1]), 1.0)
    ubar = np.mod(np.arctan2(c[:, 1], c[:, 0]), 2.0 * math.pi)
    u = np.cos(ubar)[:, None] * plane[0] + np.sin(ubar)[:, None] * plane[1]
    u[s == 0.0] = plane[0]
    ubar = np.where(s == 0.0, 0.0, ubar)
    rest = theta - c @ plane
    rn = np.linalg.norm(rest, axis=1)
    if n > 2:
        canon = orthonormal_complement(plane)[0]
        v = np.where(rn[:, None] > 0.0, rest / np.where(rn > 0, rn, 1.0)[:, None], canon)
    else:
        v = np.zeros_like(theta)
    return s, u, v, ubar


def split(theta, plane=None) -> SplitDecomposition:
    """Decompose a unit vector as s*u + sqrt(1-s^2)*v.

    Degenerate projections fall back to the first plane vector for u and
    the first complement basis vector for v.
    """
    s, u, v, ubar = split_arrays(np.asarray(theta, dtype=float)[None, :], plane)
    return SplitDecomposition(float(s[0]), u[0], v[0], float(ubar[0]))


def split_density(n: int, s):
    """Density of s = |P_plane theta| for Haar theta on S^{n-1}, n >= 4.

    g(s) = |S^1| |S^{n-3}| / |S^{n-1}| * s (1-s^2)^{(n-4)/2}.
    """
    if n < 4:
        raise ValueError("split_density needs n >= 4 (n=3 is sampled directly)")
    s_arr = np.asarray(s, dtype=float)
    if np.any((s_arr < 0.0) | (s_arr > 1.0)):
        raise ValueError("s must lie in [0, 1]")
    c = sphere_area(2) * sphere_area(n - 2) / sphere_area(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = c * s_arr * (1.0 - s_arr**2) ** ((n - 4) / 2.0)
    return float(out) if out.ndim == 0 else out

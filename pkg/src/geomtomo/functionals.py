"""Scalar functionals of bodies: volumes, sections, shadows, slices,
fractional derivatives of the parallel section function, moments.

Volumes and moments use a deterministic product grid for n <= 3 and
seeded Monte Carlo beyond.  Shadows of convex bodies in R^3 come from a
closed triangulated boundary, using the fact that the shadow of a convex
polyhedron is half the sum of |<normal, theta>| * facet area.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, roots_jacobi

from .bodies import StarBody, SupportBody, SupportBody2D, convexity_check, support_2d
from .sphere import (
    fine_grid,
    orthonormal_complement,
    rng,
    sample_sphere,
    sphere_area,
    subsphere_grid,
)

__all__ = [
    "SectionValue",
    "BoundaryMesh",
    "Estimate",
    "default_grid",
    "volume",
    "volume_mc",
    "radial_moment",
    "section_area",
    "section_areas",
    "radial_mesh",
    "support_mesh",
    "shadow_area",
    "shadow_areas",
    "support_function",
    "projection_length_2d",
    "perimeter_2d",
    "polar_volume_2d",
    "parallel_section",
    "support_point",
    "frac_derivative",
    "isotropic_constant_estimate",
]


@dataclass(frozen=True)
class SectionValue:
    value: float
    direction: np.ndarray


@dataclass(frozen=True)
class Estimate:
    """A numerical value with an absolute error estimate."""

    value: float
    error: float

    def __float__(self) -> float:
        return self.value


def default_grid(n: int, resolution: int | None = None):
    """Grid used when none is given: 4096 angles on S^1, 96 x 192 on S^2."""
    if n == 2:
        return fine_grid(2, resolution or 4096)
    if n == 3:
        r = resolution or 96
        return fine_grid(3, r, 2 * r)
    raise ValueError("deterministic grids only for n <= 3; use Monte Carlo")


def _rho_on(K: StarBody, grid) -> np.ndarray:
    return K.rho(grid.nodes)


def volume(K: StarBody, grid=None, samples: int = 100_000, seed: int = 0) -> float:
    """|K| = (|S^{n-1}|/n) E_sigma[rho^n].

    Support-parametrized bodies use |K| = (|S^2|/3) E_sigma[h * det(Hess h + h I)].
    For n >= 4 this is a Monte Carlo estimate; see :func:`volume_mc`.
    """
    n = K.n
    if isinstance(K, SupportBody):
        from .harmonics import curvature_function

        g = grid or fine_grid(3, 2 * K.h_expansion.L + 8)
        return sphere_area(3) / 3.0 * g.integrate(
            K.h_expansion.on_grid(g) * curvature_function(K.h_expansion, g)
        )
    if n > 3 and grid is None:
        return volume_mc(K, samples, seed).value
    g = grid or default_grid(n)
    return sphere_area(n) / n * g.integrate(_rho_on(K, g) ** n)


def volume_mc(K: StarBody, samples: int, seed: int) -> Estimate:
    """Monte Carlo volume with its standard error."""
    x = sample_sphere(K.n, samples, seed)
    v = sphere_area(K.n) / K.n * K.rho(x) ** K.n
    return Estimate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(samples)))


def radial_moment(K: StarBody, p: float, grid=None, samples: int = 100_000, seed: int = 0) -> float:
    """E_sigma[rho_K^{n+p}]."""
    n = K.n
    if n + p <= 0:
        raise ValueError("need n + p > 0")
    if n > 3 and grid is None:
        return float(np.mean(K.rho(sample_sphere(n, samples, seed)) ** (n + p)))
    g = grid or default_grid(n)
    return g.integrate(_rho_on(K, g) ** (n + p))


# -- central sections ------------------------------------------------------


def section_areas(K: StarBody, thetas, resolution: int = 512) -> np.ndarray:
    """|K ∩ theta^⊥| for each row of ``thetas``.

    n=2: the chord 2 rho(theta rotated by pi/2).  n=3: (1/2) int rho^2 over
    the great circle.  n >= 4: (1/(n-1)) int rho^{n-1} over a subsphere grid.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    thetas = thetas / np.linalg.norm(thetas, axis=1, keepdims=True)
    n = thetas.shape[1]
    if n != K.n:
        raise ValueError("direction dimension does not match the body")
    if n == 2:
        perp = np.column_stack([-thetas[:, 1], thetas[:, 0]])
        return 2.0 * K.rho(perp)
    if n == 3:
        from .harmonics import _great_circles

        out = np.empty(thetas.shape[0])
        step = max(1, 2_000_000 // resolution)
        for lo in range(0, thetas.shape[0], step):
            nodes, w = _great_circles(thetas[lo : lo + step], resolution)
            r = K.rho(nodes.reshape(-1, 3)).reshape(nodes.shape[:2])
            out[lo : lo + step] = 0.5 * (r**2 @ w)
        return out
    out = np.empty(thetas.shape[0])
    for i, t in enumerate(thetas):
        g = subsphere_grid(t, resolution)
        out[i] = g.integrate(K.rho(g.nodes) ** (n - 1)) / (n - 1)
    return out


def section_area(K: StarBody, theta, resolution: int = 512) -> SectionValue:
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    return SectionValue(float(section_areas(K, theta[None, :], resolution)[0]), theta)


# -- meshes and shadows ----------------------------------------------------


@dataclass(frozen=True)
class BoundaryMesh:
    """Closed triangulated surface in R^3.

    ``vertices`` (V, 3), ``triangles`` (F, 3) vertex indices oriented
    outward.  ``area_vectors`` are area-weighted outward normals.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    @property
    def area_vectors(self) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, i]] for i in range(3))
        return 0.5 * np.cross(b - a, c - a)

    @property
    def areas(self) -> np.ndarray:
        return np.linalg.norm(self.area_vectors, axis=1)

    @property
    def normals(self) -> np.ndarray:
        av = self.area_vectors
        return av / np.linalg.norm(av, axis=1, keepdims=True)

    def surface_area(self) -> float:
        return float(self.areas.sum())

    def edges_shared_twice(self) -> bool:
        e = np.concatenate(
            [self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]]
        )
        e = np.sort(e, axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return bool(np.all(counts == 2))

    def shadow(self, thetas) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        thetas = thetas / np.linalg.norm(thetas, axis=1, keepdims=True)
        av = self.area_vectors
        out = np.empty(thetas.shape[0])
        step = max(1, 40_000_000 // av.shape[0])
        for lo in range(0, thetas.shape[0], step):
            out[lo : lo + step] = 0.5 * np.abs(thetas[lo : lo + step] @ av.T).sum(axis=1)
        return out


def _uv_mesh(directions_fn, n_phi: int, n_psi: int) -> BoundaryMesh:
    """UV-sphere topology: n_phi - 1 latitude rings plus the two poles."""
    phi = math.pi * np.arange(1, n_phi) / n_phi
    psi = 2.0 * math.pi * np.arange(n_psi) / n_psi
    ring = np.stack(
        [
            np.sin(phi)[:, None] * np.cos(psi)[None, :],
            np.sin(phi)[:, None] * np.sin(psi)[None, :],
            np.cos(phi)[:, None] * np.ones(n_psi)[None, :],
        ],
        axis=-1,
    ).reshape(-1, 3)
    dirs = np.vstack([[0.0, 0.0, 1.0], ring, [0.0, 0.0, -1.0]])
    verts = directions_fn(dirs)
    R = n_phi - 1
    idx = 1 + np.arange(R * n_psi).reshape(R, n_psi)
    nxt = np.roll(idx, -1, axis=1)
    tris = [np.column_stack([np.zeros(n_psi, int), idx[0], nxt[0]])]
    a, b, c, d = idx[:-1], nxt[:-1], idx[1:], nxt[1:]
    tris.append(np.stack([a, c, b], -1).reshape(-1, 3))
    tris.append(np.stack([b, c, d], -1).reshape(-1, 3))
    south = R * n_psi + 1
    tris.append(np.column_stack([np.full(n_psi, south), nxt[-1], idx[-1]]))
    return BoundaryMesh(verts, np.vstack(tris))


def radial_mesh(K: StarBody, n_phi: int = 256, n_psi: int = 512) -> BoundaryMesh:
    """Boundary mesh with vertices rho(u) u on a UV grid of directions."""
    if K.n != 3:
        raise ValueError("meshes are built in R^3")
    return _uv_mesh(lambda d: K.rho(d)[:, None] * d, n_phi, n_psi)


def support_mesh(K: SupportBody, n_phi: int = 256, n_psi: int = 512) -> BoundaryMesh:
    """Boundary mesh with vertices x(theta) = grad h on a UV grid of normals."""
    return _uv_mesh(K.boundary, n_phi, n_psi)


def _mesh_for(K, n_phi, n_psi):
    if isinstance(K, SupportBody):
        return support_mesh(K, n_phi, n_psi)
    return radial_mesh(K, n_phi, n_psi)


def shadow_areas(
    K: StarBody,
    thetas,
    mesh_resolution: tuple[int, int] = (256, 512),
    check: bool = True,
    with_error: bool = False,
):
    """|K | theta^⊥| for each row of ``thetas`` (n=3, convex K).

    The mesh value converges as O(h^2); one Richardson step against the
    half-resolution mesh removes the leading term.  With ``with_error``
    the pair (values, |Q(h) - Q(2h)|) is returned.
    """
    if K.n != 3:
        raise ValueError("shadow_area is implemented for n = 3")
    if check and K.convex_hint is not True and not convexity_check(K).convex:
        raise ValueError("shadow_area needs a convex body")
    n_phi, n_psi = mesh_resolution
    fine = _mesh_for(K, n_phi, n_psi).shadow(thetas)
    coarse = _mesh_for(K, n_phi // 2, n_psi // 2).shadow(thetas)
    value = fine + (fine - coarse) / 3.0
    if with_error:
        return value, np.abs(fine - coarse)
    return value


def shadow_area(K: StarBody, theta, mesh_resolution: tuple[int, int] = (256, 512)) -> float:
    theta = np.asarray(theta, dtype=float)
    return float(shadow_areas(K, theta[None, :], mesh_resolution)[0])


# -- support functions and planar quantities -------------------------------


def support_function(K, thetas) -> np.ndarray:
    """h_K at each row of ``thetas``.

    Uses the closed form when the body carries one; otherwise n=2 refines
    a grid maximum by Newton steps and n=3 refines a grid maximum of
    rho(u) <u, theta> with a local optimizer.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    thetas = thetas / np.linalg.norm(thetas, axis=1, keepdims=True)
    if isinstance(K, SupportBody2D):
        return K.support_angle(np.arctan2(thetas[:, 1], thetas[:, 0]))
    if K.support_fn is not None:
        return K.support_fn(thetas)
    if K.n == 2:
        return support_2d(K, np.arctan2(thetas[:, 1], thetas[:, 0]))
    if K.n != 3:
        raise ValueError("support_function without closed form needs n <= 3")
    return np.array([_maximize_3d(K, t)[0] for t in thetas])


@functools.lru_cache(maxsize=8)
def _probe_points_3d(K):
    g = fine_grid(3, 48, 96)
    return K.rho(g.nodes)[:, None] * g.nodes


def _maximize_3d(K, t):
    """(max_u rho(u) <u, t>, maximizing boundary point): grid start, then
    Nelder-Mead on the tangent plane."""
    from scipy.optimize import minimize

    pts = _probe_points_3d(K)
    j = int(np.argmax(pts @ t))
    u0 = pts[j] / np.linalg.norm(pts[j])
    B = orthonormal_complement(u0[None, :])

    def unit(ab):
        u = u0 + ab @ B
        return u / np.linalg.norm(u)

    def neg(ab):
        u = unit(ab)
        return -float(K.rho(u[None, :])[0] * (u @ t))

    res = minimize(neg, np.zeros(2), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000})
    if -res.fun < float(pts[j] @ t):
        return float(pts[j] @ t), pts[j]
    u = unit(res.x)
    return -float(res.fun), float(K.rho(u[None, :])[0]) * u


def projection_length_2d(K, theta) -> float:
    """|K | theta^⊥| = 2 h_K(theta rotated by pi/2) for symmetric planar K."""
    theta = np.asarray(theta, dtype=float)
    perp = np.array([-theta[1], theta[0]]) / np.linalg.norm(theta)
    return float(2.0 * support_function(K, perp[None, :])[0])


def projection_lengths_2d(K, angles) -> np.ndarray:
    """Vectorized :func:`projection_length_2d` over direction angles."""
    a = np.asarray(angles, dtype=float) + 0.5 * math.pi
    return 2.0 * support_function(K, np.column_stack([np.cos(a), np.sin(a)]))


def perimeter_2d(K, resolution: int = 4096) -> float:
    """Cauchy formula: |∂K| = int_0^{2pi} h_K."""
    g = fine_grid(2, resolution)
    return 2.0 * math.pi * g.integrate(support_function(K, g.nodes))


def polar_volume_2d(K, resolution: int = 4096) -> float:
    """|K°| = (1/2) int_0^{2pi} h_K^{-2}."""
    g = fine_grid(2, resolution)
    return math.pi * g.integrate(support_function(K, g.nodes) ** -2.0)


# -- parallel sections -----------------------------------------------------


def _ray_exit(K: StarBody, origins, dirs, R: float, tol: float = 1e-10) -> np.ndarray:
    """Largest t with origin + t dir in K, by bisection on the gauge."""
    hi = np.full(dirs.shape[0], R)
    if np.any(K.gauge(origins + hi[:, None] * dirs) <= 1.0):
        raise ValueError("bisection does not bracket: ray never exits the body (malformed body)")
    lo = np.zeros_like(hi)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        inside = K.gauge(origins + mid[:, None] * dirs) <= 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def _outer_radius(K: StarBody) -> float:
    if K.n <= 3:
        g = default_grid(K.n, 64 if K.n == 3 else 4096)
        return float(K.rho(g.nodes).max())
    return float(K.rho(sample_sphere(K.n, 4096, 0)).max())


def support_point(K, theta) -> np.ndarray:
    """A boundary point x of convex K with <x, theta> = h_K(theta).

    Closed-form support functions give x as the gradient of their
    1-homogeneous extension (central differences); otherwise
    rho(u) <u, theta> is maximized over u.
    """
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    n = theta.size
    if isinstance(K, SupportBody):
        return K.boundary(theta[None, :])[0]
    if isinstance(K, SupportBody2D) or K.support_fn is not None:
        d = 1e-6
        E = np.eye(n) * d

        def H(x):
            r = np.linalg.norm(x, axis=1)
            return r * support_function(K, x / r[:, None])

        return (H(theta + E) - H(theta - E)) / (2.0 * d)
    if n == 2:
        from scipy.optimize import minimize_scalar

        m = 4096
        a = 2.0 * math.pi * np.arange(m) / m
        t = math.atan2(theta[1], theta[0])
        j = int(np.argmax(K.rho_angle(a) * np.cos(a - t)))
        step = 2.0 * math.pi / m
        res = minimize_scalar(lambda u: -float(K.rho_angle(np.array([u]))[0] * math.cos(u - t)),
                              bounds=(a[j] - step, a[j] + step), method="bounded",
                              options={"xatol": 1e-12})
        u = res.x
        return float(K.rho_angle(np.array([u]))[0]) * np.array([math.cos(u), math.sin(u)])
    if n != 3:
        raise ValueError("support_point without closed form needs n <= 3")
    return _maximize_3d(K, theta)[1]


def parallel_section(
    K: StarBody, theta, z, angular_resolution: int = 256, outer_radius: float | None = None
):
    """A_{K,theta}(z) = |K ∩ (theta^⊥ + z theta)| for convex K, n in {2, 3}.

    Polar integration inside the slice about c = (z/h) x*, where x* is the
    support point in direction sign(z) theta and h = h_K(sign(z) theta); c
    lies in the slice by convexity.  The boundary along each ray is found
    by bisection on ||x||_K <= 1.  Returns 0 for |z| >= h.  ``z`` may be an
    array.
    """
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    n = K.n
    R = 2.0 * (outer_radius or _outer_radius(K)) * 1.05
    if n == 2:
        perp = np.array([-theta[1], theta[0]])
        dirs = np.array([perp, -perp])
    elif n == 3:
        B = orthonormal_complement(theta[None, :])
        a = 2.0 * math.pi * np.arange(angular_resolution) / angular_resolution
        dirs = np.cos(a)[:, None] * B[0] + np.sin(a)[:, None] * B[1]
    else:
        raise ValueError("parallel_section implemented for n <= 3")
    centers = np.zeros((zs.size, n))
    inside = np.zeros(zs.size, dtype=bool)
    for sign in (1.0, -1.0):
        sel = (zs > 0) if sign > 0 else (zs <= 0)
        if not np.any(sel):
            continue
        xs = support_point(K, sign * theta)
        h = float(xs @ (sign * theta))
        frac = np.abs(zs[sel]) / h
        centers[sel] = frac[:, None] * xs[None, :]
        inside[sel] = frac < 1.0
    out = np.zeros(zs.size)
    if np.any(inside):
        c = centers[inside]
        m = dirs.shape[0]
        origins = np.repeat(c, m, axis=0)
        t = _ray_exit(K, origins, np.tile(dirs, (c.shape[0], 1)), R).reshape(-1, m)
        if n == 2:
            out[inside] = t.sum(axis=1)
        else:
            out[inside] = 0.5 * np.mean(t**2, axis=1) * 2.0 * math.pi
    return out if np.ndim(z) else float(out[0])


def frac_derivative(
    K: StarBody, theta, q: float, nodes: int = 24, angular_resolution: int = 256
) -> float:
    """Fractional derivative A_{K,theta}^{(q)}(0) for q in (-1, 0) ∪ (0, 1).

    q < 0: (1/Gamma(-q)) int_0^h t^{-1-q} A(t) dt.
    q > 0: (1/Gamma(-q)) [int_0^h t^{-1-q} (A(t) - A(0)) dt - A(0) h^{-q} / q].
    h = h_K(theta) bounds the support of A.  The singular weights are
    handled by Gauss-Jacobi rules.
    """
    if not -1.0 < q < 1.0 or q == 0.0:
        raise ValueError("q must lie in (-1, 0) or (0, 1)")
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    h = float(support_function(K, theta[None, :])[0])
    R = _outer_radius(K)

    def A(t):
        return parallel_section(K, theta, t, angular_resolution, R)

    if q < 0:
        x, w = roots_jacobi(nodes, 0.0, -1.0 - q)
        t = 0.5 * h * (x + 1.0)
        integral = (0.5 * h) ** (-q) * np.dot(w, A(t))
        return float(integral / gamma(-q))
    x, w = roots_jacobi(nodes, 0.0, -q)
    t = 0.5 * h * (x + 1.0)
    a0 = A(np.array([0.0]))[0]
    integral = (0.5 * h) ** (1.0 - q) * np.dot(w, (A(t) - a0) / t)
    return float((integral - a0 * h ** (-q) / q) / gamma(-q))


# -- isotropic constant ----------------------------------------------------


def isotropic_constant_estimate(K: StarBody, samples: int = 200_000, seed: int = 0) -> float:
    """L_K = det(Cov)^{1/(2n)} / |K|^{1/n} from rejection sampling.

    Uniform points in the ball of radius max rho (4096 probe directions,
    plus a 2% margin) are kept when inside K.
    """
    n = K.n
    R = 1.02 * float(K.rho(sample_sphere(n, 4096, seed)).max())
    gen = rng(seed, "isotropic", n)
    g = gen.standard_normal((samples, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = g * (R * gen.random(samples) ** (1.0 / n))[:, None]
    keep = pts[K.contains(pts)]
    if keep.shape[0] < max(2 * n, 1e-4 * samples):
        raise ValueError("body too thin for rejection sampling")
    cov = np.cov(keep.T)
    vol = volume(K) if n <= 3 else volume_mc(K, samples, seed).value
    return float(np.linalg.det(cov) ** (1.0 / (2 * n)) / vol ** (1.0 / n))

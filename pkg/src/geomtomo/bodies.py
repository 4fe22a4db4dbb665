"""Star and convex bodies given by evaluators of their radial or support
functions, plus the constructions used throughout the package.

Every body carries a text form (``spec``) such as ``K0 eps=0.1`` or
``l2sum(K0 eps=0.1, ball n=1 r=1)``; :func:`parse_body` rebuilds it.
"""
from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .sphere import rng, sample_sphere, fine_grid

__all__ = [
    "StarBody",
    "SupportBody2D",
    "SupportBody",
    "HarmonicBody",
    "LiftedBody",
    "twisted",
    "SphereFunction",
    "ConvexityReport",
    "ball",
    "ellipsoid",
    "cube",
    "planar_seed",
    "eps_max",
    "l2_sum",
    "polar_2d",
    "support_2d",
    "perturbation_body",
    "convexity_check",
    "curvature_numerator",
    "equal_distributed_harmonic_pair",
    "sphere_function",
    "rotated",
    "scaled",
    "parse_body",
    "register_body",
]


def _unit_rows(points) -> np.ndarray:
    x = np.atleast_2d(np.asarray(points, dtype=float))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class SphereFunction:
    """A real function on S^{n-1}, evaluated on (N, n) arrays."""

    n: int
    f: Callable[[np.ndarray], np.ndarray]
    even: bool = True
    label: str = ""

    def __call__(self, points) -> np.ndarray:
        return np.asarray(self.f(_unit_rows(points)), dtype=float)


@dataclass(frozen=True, eq=False)
class StarBody:
    """Origin star body in R^n with radial function ``rho``.

    ``rho`` takes an (N, n) array of unit vectors.  ``support`` is an
    optional closed-form support function with the same calling
    convention.  ``spec`` is the text form accepted by :func:`parse_body`.
    """

    n: int
    rho_fn: Callable[[np.ndarray], np.ndarray]
    even: bool = True
    spec: str = ""
    support_fn: Callable[[np.ndarray], np.ndarray] | None = None
    convex_hint: bool | None = None

    @property
    def label(self) -> str:
        return self.spec

    def rho(self, points) -> np.ndarray:
        return np.asarray(self.rho_fn(_unit_rows(points)), dtype=float)

    def __call__(self, points) -> np.ndarray:
        return self.rho(points)

    def gauge(self, x) -> np.ndarray:
        """Minkowski functional |x| / rho(x/|x|) (zero at the origin)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        out = np.zeros(x.shape[0])
        nz = r > 0
        if np.any(nz):
            out[nz] = r[nz] / self.rho(x[nz])
        return out

    def contains(self, x) -> np.ndarray:
        return self.gauge(x) <= 1.0

    def rho_angle(self, angles) -> np.ndarray:
        """Radial function of a planar body as a function of the angle."""
        if self.n != 2:
            raise ValueError("rho_angle is for planar bodies")
        a = np.asarray(angles, dtype=float)
        return self.rho(np.column_stack([np.cos(a.ravel()), np.sin(a.ravel())])).reshape(a.shape)

    def __repr__(self) -> str:
        return f"StarBody(n={self.n}, {self.spec!r})"


@dataclass(frozen=True, eq=False)
class SupportBody2D:
    """Planar convex body given by its support function h(angle)."""

    h: Callable[[np.ndarray], np.ndarray]
    spec: str = ""

    n = 2

    def support_angle(self, angles) -> np.ndarray:
        return np.asarray(self.h(np.asarray(angles, dtype=float)), dtype=float)

    def convexity_margin(self, resolution: int = 4096) -> float:
        """min of h + h'' on a periodic grid (>= -1e-8 for a convex body)."""
        a = 2.0 * math.pi * np.arange(resolution) / resolution
        d = 2.0 * math.pi / resolution
        hv = self.support_angle(a)
        h2 = (self.support_angle(a + d) - 2.0 * hv + self.support_angle(a - d)) / d**2
        return float(np.min(hv + h2))

    def as_star_body(self, resolution: int = 4096) -> StarBody:
        """Radial function rho(u) = min_theta h(theta)/cos(theta - u)."""
        grid = 2.0 * math.pi * np.arange(resolution) / resolution
        hv = self.support_angle(grid)

        def rho(points):
            u = np.arctan2(points[:, 1], points[:, 0])
            c = np.cos(grid[None, :] - u[:, None])
            with np.errstate(divide="ignore"):
                ratio = np.where(c > 1e-12, hv[None, :] / np.where(c > 1e-12, c, 1.0), np.inf)
            return ratio.min(axis=1)

        return StarBody(2, rho, True, f"star({self.spec})", lambda p: self.support_angle(
            np.arctan2(p[:, 1], p[:, 0])), True)


class SupportBody(StarBody):
    """Convex body in R^3 held by a harmonic expansion of its support function.

    The boundary is parametrized by the outer normal: x(theta) = grad H(theta),
    with H the 1-homogeneous extension of h.  The radial function is
    recovered by solving x(theta)/|x(theta)| = u for theta.
    """

    def __init__(self, h_expansion, spec: str = ""):
        object.__setattr__(self, "h_expansion", h_expansion)
        super().__init__(3, self._rho, True, spec, self._support, True)

    def _support(self, points):
        return self.h_expansion.evaluate(points)

    def _homog(self, x):
        r = np.linalg.norm(x, axis=1)
        return r * self.h_expansion.evaluate(x / r[:, None])

    def boundary(self, theta, step: float = 1e-5) -> np.ndarray:
        """Boundary points with outer normal ``theta``: grad of the 1-homogeneous h."""
        theta = _unit_rows(theta)
        g = np.empty_like(theta)
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            g[:, i] = (self._homog(theta + e) - self._homog(theta - e)) / (2.0 * step)
        return g

    def _rho(self, points, iters: int = 30, tol: float = 1e-13):
        u = _unit_rows(points)
        ref = np.where(np.abs(u[:, [0]]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
        ea = np.cross(u, ref)
        ea /= np.linalg.norm(ea, axis=1, keepdims=True)
        eb = np.cross(u, ea)
        ab = np.zeros((u.shape[0], 2))

        def resid(ab_):
            th = u + ab_[:, [0]] * ea + ab_[:, [1]] * eb
            x = self.boundary(th)
            d = x / np.linalg.norm(x, axis=1, keepdims=True)
            return np.column_stack([np.sum(d * ea, 1), np.sum(d * eb, 1)]), x

        h = 1e-6
        for _ in range(iters):
            r0, x = resid(ab)
            if np.max(np.abs(r0)) < tol:
                break
            ra, _ = resid(ab + [h, 0.0])
            rb, _ = resid(ab + [0.0, h])
            J = np.stack([(ra - r0) / h, (rb - r0) / h], axis=2)
            ab = ab - np.linalg.solve(J, r0[:, :, None])[:, :, 0]
        _, x = resid(ab)
        return np.linalg.norm(x, axis=1)

    def principal_radii(self, grid=None) -> np.ndarray:
        from .harmonics import principal_radii

        grid = grid or fine_grid(3, 2 * self.h_expansion.L + 2)
        return principal_radii(self.h_expansion, grid)

    def __repr__(self) -> str:
        return f"SupportBody(L={self.h_expansion.L}, {self.spec!r})"


# -- elementary bodies -----------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def ball(n: int, r: float = 1.0) -> StarBody:
    """Centered Euclidean ball of radius r in R^n."""
    if r <= 0:
        raise ValueError("radius must be positive")
    r = float(r)
    return StarBody(
        n,
        lambda p: np.full(p.shape[0], r),
        True,
        f"ball n={n} r={_fmt(r)}",
        lambda p: np.full(p.shape[0], r),
        True,
    )


def ellipsoid(semiaxes) -> StarBody:
    """Axis-aligned centered ellipsoid; rho(theta) = (sum theta_i^2/a_i^2)^{-1/2}."""
    a = np.asarray(semiaxes, dtype=float)
    if np.any(a <= 0):
        raise ValueError("semiaxes must be positive")
    spec = "ellipsoid a=" + ":".join(_fmt(v) for v in a)
    return StarBody(
        a.size,
        lambda p: 1.0 / np.sqrt(np.sum((p / a) ** 2, axis=1)),
        True,
        spec,
        lambda p: np.sqrt(np.sum((p * a) ** 2, axis=1)),
        True,
    )


def cube(n: int, side: float = 1.0) -> StarBody:
    """Cube [-side/2, side/2]^n."""
    half = 0.5 * float(side)
    return StarBody(
        n,
        lambda p: half / np.max(np.abs(p), axis=1),
        True,
        f"cube n={n} side={_fmt(side)}",
        lambda p: half * np.sum(np.abs(p), axis=1),
        True,
    )


def _seed_rho(kind: str, eps: float):
    if kind == "E0":
        return lambda p: (1.0 + eps * (p[:, 1] / np.hypot(p[:, 0], p[:, 1])) ** 2) ** -0.5
    if kind == "K0":
        # sin(2u) = 2 sin u cos u
        def rho(p):
            r2 = p[:, 0] ** 2 + p[:, 1] ** 2
            s2 = (2.0 * p[:, 0] * p[:, 1] / r2) ** 2
            return (1.0 + eps * s2) ** -0.5

        return rho
    raise ValueError(f"unknown planar seed {kind!r}")


@functools.lru_cache(maxsize=None)
def eps_max(kind: str, upper: float = 50.0, tol: float = 1e-6) -> float:
    """Largest eps keeping the planar seed convex (bisection on the curvature test).

    Returns ``upper`` when the seed stays convex on the whole search range
    (E0 is an ellipse for every eps > -1).
    """

    def ok(eps):
        body = StarBody(2, _seed_rho(kind, eps), True, "")
        return convexity_check(body).convex

    if ok(upper):
        return upper
    lo, hi = 0.0, upper
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def planar_seed(kind: str, eps: float) -> StarBody:
    """The planar bodies E0 (an ellipse) and K0 with equal radial distributions.

    rho_E0(u) = (1 + eps sin^2 u)^{-1/2}, rho_K0(u) = (1 + eps sin^2 2u)^{-1/2}.
    """
    eps = float(eps)
    if kind not in ("E0", "K0"):
        raise ValueError(f"unknown planar seed {kind!r}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps > eps_max(kind):
        raise ValueError(f"eps too large: {kind} is not convex at eps={eps}")
    support = None
    if kind == "E0":
        b = (1.0 + eps) ** -0.5
        support = lambda p: np.sqrt(p[:, 0] ** 2 + (b * p[:, 1]) ** 2)  # noqa: E731
    return StarBody(2, _seed_rho(kind, eps), True, f"{kind} eps={_fmt(eps)}", support, True)


def l2_sum(A: StarBody, B: StarBody) -> StarBody:
    """l2-sum: ||(x, y)|| = (||x||_A^2 + ||y||_B^2)^{1/2} in R^{nA + nB}."""
    na, nb = A.n, B.n

    def rho(p):
        x, y = p[:, :na], p[:, na:]
        return 1.0 / np.sqrt(A.gauge(x) ** 2 + B.gauge(y) ** 2)

    return StarBody(na + nb, rho, A.even and B.even, f"l2sum({A.spec}, {B.spec})",
                    None, bool(A.convex_hint and B.convex_hint) or None)


def rotated(K: StarBody, R) -> StarBody:
    """The body R K for an orthogonal matrix R."""
    R = np.asarray(R, dtype=float)
    spec = f"rotate({K.spec}, R=" + ":".join(_fmt(v) for v in R.ravel()) + ")"
    sup = None if K.support_fn is None else (lambda p: K.support_fn(p @ R))
    return StarBody(K.n, lambda p: K.rho(p @ R), K.even, spec, sup, K.convex_hint)


def scaled(K: StarBody, r: float) -> StarBody:
    r = float(r)
    sup = None if K.support_fn is None else (lambda p: r * K.support_fn(p))
    return StarBody(K.n, lambda p: r * K.rho(p), K.even, f"scale({K.spec}, r={_fmt(r)})",
                    sup, K.convex_hint)


# -- planar support functions and polars -----------------------------------


def support_2d(K, angles, resolution: int = 4096, newton: int = 4) -> np.ndarray:
    """Support function h_K(angle) of a planar body.

    Closed forms are used when available; otherwise a grid maximum of
    rho(u) cos(u - angle) is refined by Newton steps on u.
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if isinstance(K, SupportBody2D):
        return K.support_angle(angles)
    if K.support_fn is not None:
        return K.support_fn(np.column_stack([np.cos(angles), np.sin(angles)]))
    grid = 2.0 * math.pi * np.arange(resolution) / resolution
    rv = K.rho_angle(grid)
    pts = np.vstack([rv * np.cos(grid), rv * np.sin(grid)])
    out = np.empty(angles.size)
    d = 1e-4
    for lo in range(0, angles.size, 1024):
        t = angles[lo : lo + 1024]
        j = np.argmax(np.column_stack([np.cos(t), np.sin(t)]) @ pts, axis=1)
        u = grid[j]

        def g(v):
            return K.rho_angle(v) * np.cos(v - t)

        for _ in range(newton):
            gp, g0, gm = g(u + d), g(u), g(u - d)
            g1 = (gp - gm) / (2 * d)
            g2 = (gp - 2 * g0 + gm) / d**2
            step = np.where(g2 < 0, -g1 / np.where(g2 < 0, g2, -1.0), 0.0)
            u = u + np.clip(step, -2 * math.pi / resolution, 2 * math.pi / resolution)
        out[lo : lo + 1024] = np.maximum(g(u), rv[j] * np.cos(grid[j] - t))
    return out


def polar_2d(K, resolution: int = 4096, check: bool = True) -> StarBody:
    """Polar body of a planar convex body: rho_polar = 1 / h_K."""
    if check and isinstance(K, StarBody) and not convexity_check(K).convex:
        raise ValueError("polar_2d needs a convex body")
    spec = f"polar({K.spec})"

    def rho(p):
        return 1.0 / support_2d(K, np.arctan2(p[:, 1], p[:, 0]), resolution)

    def support(p):
        # h_{K°} = 1/rho_K for convex K
        if isinstance(K, SupportBody2D):
            return 1.0 / K.as_star_body().rho(p)
        return 1.0 / K.rho(p)

    return StarBody(2, rho, True, spec, support, True)


# -- convexity -------------------------------------------------------------


@dataclass(frozen=True)
class ConvexityReport:
    convex: bool
    margin: float
    direction: np.ndarray | None = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return self.convex


def curvature_numerator(rho_fn, angles, step: float = 2.0 * math.pi / 4096):
    """rho^2 + 2 rho'^2 - rho rho'' along a planar curve rho(angle)."""
    r0 = rho_fn(angles)
    rp = rho_fn(angles + step)
    rm = rho_fn(angles - step)
    d1 = (rp - rm) / (2.0 * step)
    d2 = (rp - 2.0 * r0 + rm) / step**2
    return r0**2 + 2.0 * d1**2 - r0 * d2


def convexity_check(
    K: StarBody, slices: int = 64, angles: int = 512, seed: int = 0, tol: float = 1e-6
) -> ConvexityReport:
    """Planar curvature test on central 2-plane slices.

    n=2 uses the single slice with 4096 angles.  n >= 3 uses the coordinate
    planes plus ``slices`` Haar-random planes, ``angles`` points each.
    Support-parametrized bodies are tested through their principal radii.
    """
    if isinstance(K, SupportBody):
        radii = K.principal_radii()
        m = float(radii.min())
        return ConvexityReport(m > 0.0, m)
    if K.n == 2:
        a = 2.0 * math.pi * np.arange(4096) / 4096
        num = curvature_numerator(K.rho_angle, a)
        i = int(np.argmin(num))
        return ConvexityReport(bool(num[i] >= -tol), float(num[i]),
                               np.array([math.cos(a[i]), math.sin(a[i])]))
    n = K.n
    planes = [np.eye(n)[[i, j]] for i in range(n) for j in range(i + 1, n)]
    g = rng(seed, "convexity", n).standard_normal((slices, n, 2))
    q, _ = np.linalg.qr(g)
    planes += [qi.T for qi in q]
    a = 2.0 * math.pi * np.arange(angles) / angles
    worst, where = math.inf, None
    for P in planes:

        def along(t, P=P):
            t = np.asarray(t)
            pts = np.cos(t)[:, None] * P[0] + np.sin(t)[:, None] * P[1]
            return K.rho(pts)

        num = curvature_numerator(along, a)
        i = int(np.argmin(num))
        if num[i] < worst:
            worst = float(num[i])
            where = math.cos(a[i]) * P[0] + math.sin(a[i]) * P[1]
    return ConvexityReport(worst >= -tol, worst, where)


# -- perturbations ---------------------------------------------------------


def perturbation_body(f: SphereFunction, eps: float, p: float, check: bool = True) -> StarBody:
    """Body with radial function (1 + eps f)^p."""
    if p == 0:
        raise ValueError("p must be nonzero")
    eps, p = float(eps), float(p)
    n = f.n
    probe = _probe_points(n)
    base = 1.0 + eps * f(probe)
    if np.any(base <= 0):
        i = int(np.argmin(base))
        raise ValueError(f"1 + eps f <= 0 at direction {probe[i]}")
    body = StarBody(
        n,
        lambda x: (1.0 + eps * f(x)) ** p,
        f.even,
        f"perturb f={f.label} eps={_fmt(eps)} p={_fmt(p)} n={n}",
    )
    if check:
        rep = convexity_check(body)
        if not rep.convex:
            raise ValueError(
                f"perturbation body not convex (margin {rep.margin:.3g}) near {rep.direction}"
            )
        body = StarBody(n, body.rho_fn, body.even, body.spec, None, True)
    return body


def _probe_points(n: int) -> np.ndarray:
    if n == 2:
        return fine_grid(2, 4096).nodes
    if n == 3:
        return np.vstack([fine_grid(3, 64).nodes, sample_sphere(3, 4096, 0)])
    return sample_sphere(n, 100_000, 0)


def _bump(phi):
    t = (phi - math.pi / 2.0) / 0.4
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def _spherical(p):
    phi = np.arccos(np.clip(p[:, 2], -1.0, 1.0))
    psi = np.arctan2(p[:, 1], p[:, 0])
    return phi, psi


def equal_distributed_harmonic_pair(delta: float = 0.5):
    """H2 = sin^2(phi) cos(2 psi) on S^2 and its azimuthal twist F.

    F(phi, psi) = H2(phi, psi + delta w(phi)) with w a smooth bump supported
    in |phi - pi/2| < 0.4.  Azimuthal shifts preserve sigma, so F and H2 are
    equally distributed, while F differs from H2 where w > 0.
    """
    delta = float(delta)
    H2 = sphere_function(f"H2")
    F = sphere_function(f"F:{_fmt(delta)}")
    return H2, F


def _trig(coeffs):
    """Even planar function sum_k a_k cos(2k u) + b_k sin(2k u)."""
    c = np.asarray(coeffs, dtype=float).reshape(-1, 2)

    def f(p):
        u = np.arctan2(p[:, 1], p[:, 0])
        k = 2.0 * np.arange(1, c.shape[0] + 1)
        return np.cos(np.outer(u, k)) @ c[:, 0] + np.sin(np.outer(u, k)) @ c[:, 1]

    return f


def _zonal_trig3(coeffs):
    """Even function on S^2: sum over real harmonics given as m:k:c triples."""
    c = np.asarray(coeffs, dtype=float).reshape(-1, 3)

    def f(p):
        from .harmonics import HarmonicExpansion

        L = int(c[:, 0].max())
        co = np.zeros((L + 1, 2 * L + 1))
        for m, k, v in c:
            co[int(m), L + int(k)] = v
        return HarmonicExpansion(3, L, co).evaluate(p)

    return f


def sphere_function(label: str) -> SphereFunction:
    """Named test functions; ``label`` is also their text form.

    P2 (P_2(x_3) on S^2), sin2 (sin^2 u on S^1), sin2_2 (sin^2 2u on S^1),
    H2, F:<delta> (twisted H2), trig:a1:b1:... (even planar trig
    polynomial), sh:m:k:c:... (real harmonics on S^2).
    """
    name, _, rest = label.partition(":")
    args = [float(v) for v in rest.split(":")] if rest else []
    if name == "P2":
        return SphereFunction(3, lambda p: 1.5 * p[:, 2] ** 2 - 0.5, True, label)
    if name == "sin2":
        return SphereFunction(2, lambda p: p[:, 1] ** 2 / (p[:, 0] ** 2 + p[:, 1] ** 2), True, label)
    if name == "sin2_2":
        return SphereFunction(
            2, lambda p: (2 * p[:, 0] * p[:, 1] / (p[:, 0] ** 2 + p[:, 1] ** 2)) ** 2, True, label
        )
    if name == "H2":
        return SphereFunction(3, lambda p: p[:, 0] ** 2 - p[:, 1] ** 2, True, label)
    if name == "F":
        delta = args[0]

        def twisted(p):
            phi, psi = _spherical(p)
            return np.sin(phi) ** 2 * np.cos(2.0 * (psi + delta * _bump(phi)))

        return SphereFunction(3, twisted, True, label)
    if name == "trig":
        return SphereFunction(2, _trig(args), True, label)
    if name == "sh":
        return SphereFunction(3, _zonal_trig3(args), True, label)
    if name == "zero":
        n = int(args[0]) if args else 3
        return SphereFunction(n, lambda p: np.zeros(p.shape[0]), True, label)
    raise ValueError(f"unknown sphere function {label!r}")


# -- text form -------------------------------------------------------------

_BUILDERS: dict[str, Callable] = {}


def register_body(name: str):
    def deco(fn):
        _BUILDERS[name] = fn
        return fn

    return deco


register_body("ball")(lambda bodies, kw: ball(int(kw["n"]), float(kw.get("r", 1.0))))
register_body("ellipsoid")(
    lambda bodies, kw: ellipsoid([float(v) for v in kw["a"].split(":")])
)
register_body("cube")(lambda bodies, kw: cube(int(kw["n"]), float(kw.get("side", 1.0))))
register_body("E0")(lambda bodies, kw: planar_seed("E0", float(kw["eps"])))
register_body("K0")(lambda bodies, kw: planar_seed("K0", float(kw["eps"])))
register_body("l2sum")(lambda bodies, kw: l2_sum(bodies[0], bodies[1]))
register_body("polar")(lambda bodies, kw: polar_2d(bodies[0]))
register_body("scale")(lambda bodies, kw: scaled(bodies[0], float(kw["r"])))
register_body("rotate")(
    lambda bodies, kw: rotated(
        bodies[0],
        np.array([float(v) for v in kw["R"].split(":")]).reshape(bodies[0].n, bodies[0].n),
    )
)
register_body("perturb")(
    lambda bodies, kw: perturbation_body(
        sphere_function(kw["f"]), float(kw["eps"]), float(kw["p"]), check=False
    )
)

_TOKEN = re.compile(r"\s*([A-Za-z_][\w]*)")


def parse_body(text: str) -> StarBody:
    """Rebuild a body from its text form."""
    body, pos = _parse(text, 0)
    if text[pos:].strip():
        raise ValueError(f"trailing text in body spec: {text[pos:]!r}")
    return body


def _parse(text: str, pos: int):
    m = _TOKEN.match(text, pos)
    if not m:
        raise ValueError(f"expected a body name at {text[pos:]!r}")
    name, pos = m.group(1), m.end()
    if name not in _BUILDERS:
        raise ValueError(f"unknown body kind {name!r}")
    bodies, kw = [], {}
    if pos < len(text) and text[pos] == "(":
        pos += 1
        while True:
            rest = text[pos:].lstrip()
            pos = len(text) - len(rest)
            kv = re.match(r"([A-Za-z_]\w*)=([^,()\s]+)", rest)
            if kv and not re.match(r"[A-Za-z_]\w*\s", rest):
                kw[kv.group(1)] = kv.group(2)
                pos += kv.end()
            else:
                b, pos = _parse(text, pos)
                bodies.append(b)
            rest = text[pos:].lstrip()
            pos = len(text) - len(rest)
            if rest.startswith(","):
                pos += 1
                continue
            if rest.startswith(")"):
                pos += 1
                break
            raise ValueError(f"malformed body spec near {rest!r}")
    else:
        while True:
            kv = re.match(r"\s+([A-Za-z_]\w*)=([^,()\s]+)", text[pos:])
            if not kv:
                break
            kw[kv.group(1)] = kv.group(2)
            pos += kv.end()
    return _BUILDERS[name](bodies, kw), pos


class HarmonicBody(StarBody):
    """Star body in R^3 whose power rho^p is a harmonic expansion.

    Bodies obtained by inverting intersection bodies are held this way
    (p = n - 1 = 2), which keeps their Radon transforms exact.
    """

    def __init__(self, power_expansion, power: float = 2.0, spec: str = ""):
        object.__setattr__(self, "power_expansion", power_expansion)
        object.__setattr__(self, "power", float(power))
        super().__init__(3, self._rho, True, spec)

    def _rho(self, points):
        v = self.power_expansion.evaluate(points)
        if np.any(v <= 0):
            raise ValueError("harmonic body has a nonpositive radial power")
        return v ** (1.0 / self.power)

    def rho_on_grid(self, grid) -> np.ndarray:
        return self.power_expansion.on_grid(grid) ** (1.0 / self.power)

    def __repr__(self) -> str:
        return f"HarmonicBody(L={self.power_expansion.L}, {self.spec!r})"


def twisted(K: StarBody, delta: float) -> StarBody:
    """K composed with the latitude-dependent rotation about e3.

    T(x, y, z) = (R_{delta z^2}(x, y), z) is a smooth sigma-preserving
    diffeomorphism of S^2 commuting with x -> -x, so the radial function
    of the result has exactly the distribution of rho_K.
    """
    if K.n != 3:
        raise ValueError("twist is defined in R^3")
    delta = float(delta)

    def rho(p):
        a = delta * p[:, 2] ** 2
        c, s = np.cos(a), np.sin(a)
        q = np.column_stack([c * p[:, 0] - s * p[:, 1], s * p[:, 0] + c * p[:, 1], p[:, 2]])
        return K.rho(q)

    return StarBody(3, rho, K.even, f"twist({K.spec}, delta={_fmt(delta)})")


class LiftedBody(StarBody):
    """Body in R^n from a body in R^{k+1} that is rotation invariant in its
    last k-1 coordinates: ||x + y||_K = ||x + y~||_base with |y~| = |y|.

    ``planar`` is the planar body K0 (or E0) whose l2-sum with B_2^{k-1}
    is the intersection body of ``base``; it enters the closed form of the
    k-dimensional sections.
    """

    def __init__(self, base: StarBody, n: int, planar: StarBody | None = None, spec: str = ""):
        if base.n > n:
            raise ValueError("base body has larger dimension than the target")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "planar", planar)
        object.__setattr__(self, "k", base.n - 1)
        super().__init__(n, self._rho, True, spec or f"lift({base.spec}, n={n})")

    def _rho(self, p):
        m = self.base.n
        tail = np.linalg.norm(p[:, 2:], axis=1)
        pad = np.zeros((p.shape[0], m - 3))
        return self.base.rho(np.column_stack([p[:, :2], tail, pad]))


register_body("twist")(lambda bodies, kw: twisted(bodies[0], float(kw["delta"])))
register_body("lift")(lambda bodies, kw: LiftedBody(bodies[0], int(kw["n"])))

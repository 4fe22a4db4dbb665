"""Distribution functions of sectional and projection functionals.

An :class:`EmpiricalCDF` is a weighted sample (grid nodes with quadrature
weights, or Monte Carlo draws with equal weights).  All comparisons use
the survival convention S(t) = P(X >= t) and are evaluated exactly at the
merged jump points, so identical samples compare as exactly equal.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import HarmonicBody, LiftedBody, StarBody, SupportBody
from .functionals import projection_lengths_2d, section_areas, shadow_areas
from .sphere import fine_grid, sample_grassmannian_frames, sample_sphere

__all__ = [
    "EmpiricalCDF",
    "direction_sample",
    "section_distribution",
    "projection_distribution",
    "radial_distribution",
    "k_section_distribution",
    "k_section_closed_form",
    "k_section_direct",
    "ks_distance",
    "dominates",
    "moment_sequence",
]


@dataclass(frozen=True, eq=False)
class EmpiricalCDF:
    """Weighted sample with survival S(t) = sum of weights of samples >= t."""

    samples: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, values, weights=None, meta: dict | None = None) -> "EmpiricalCDF":
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("empty sample")
        w = np.full(v.size, 1.0 / v.size) if weights is None else np.asarray(weights, float).ravel()
        if w.shape != v.shape or np.any(w < 0):
            raise ValueError("weights must be nonnegative and match the samples")
        w = w / w.sum()
        order = np.argsort(v, kind="stable")
        return cls(v[order], w[order], dict(meta or {}))

    @property
    def _tail(self) -> np.ndarray:
        # reverse cumulative sums: exactly 0 beyond the largest sample
        return _tail_sums(self.weights)

    def survival(self, t) -> np.ndarray:
        """P(X >= t)."""
        return self._tail[np.searchsorted(self.samples, t, side="left")]

    def survival_strict(self, t) -> np.ndarray:
        """P(X > t)."""
        return self._tail[np.searchsorted(self.samples, t, side="right")]

    def cdf(self, t) -> np.ndarray:
        return 1.0 - self.survival_strict(t)

    def mean(self) -> float:
        return float(np.dot(self.samples, self.weights))

    def support(self) -> tuple[float, float]:
        live = self.samples[self.weights > 0]
        return float(live[0]), float(live[-1])

    def support_width(self) -> float:
        lo, hi = self.support()
        return hi - lo

    def scaled(self, c: float) -> "EmpiricalCDF":
        return EmpiricalCDF(self.samples * c, self.weights, dict(self.meta))

    # -- serialization -----------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.meta, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "weight"])
        for v, wt in zip(self.samples, self.weights):
            w.writerow([repr(float(v)), repr(float(wt))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EmpiricalCDF":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError("missing metadata header")
        meta = json.loads(lines[0][1:].strip())
        rows = list(csv.DictReader(lines[1:]))
        v = np.array([float(r["value"]) for r in rows])
        w = np.array([float(r["weight"]) for r in rows])
        return cls(v, w, meta)

    def curve_text(self) -> str:
        """Two columns (t, survival) at the distinct jump points."""
        t = np.unique(self.samples)
        s = self.survival(t)
        return "".join(f"{a!r} {b!r}\n" for a, b in zip(t.tolist(), s.tolist()))


# -- samplers --------------------------------------------------------------


def direction_sample(n: int, grid=None, samples: int | None = None, seed: int = 0):
    """(nodes, weights, description) for Haar integration on S^{n-1}.

    Defaults: 4096 angles on S^1, a 48 x 96 product grid on S^2, and
    10^5 Monte Carlo draws beyond.
    """
    if grid is not None:
        return grid.nodes, grid.weights / grid.weights.sum(), f"grid {len(grid)}"
    if samples is not None or n > 3:
        count = samples or 100_000
        return sample_sphere(n, count, seed), None, f"mc {count} seed={seed}"
    g = fine_grid(2, 4096) if n == 2 else fine_grid(3, 48, 96)
    return g.nodes, g.weights, f"grid {len(g)}"


def _meta(functional, K, desc, seed):
    return {"functional": functional, "body": K.spec, "sampler": desc, "seed": seed}


def radial_distribution(K: StarBody, grid=None, samples=None, seed: int = 0) -> EmpiricalCDF:
    """Distribution of rho_K over Haar directions."""
    nodes, w, desc = direction_sample(K.n, grid, samples, seed)
    if isinstance(K, HarmonicBody) and grid is not None and grid.polar is not None:
        vals = K.rho_on_grid(grid)
    else:
        vals = K.rho(nodes)
    return EmpiricalCDF.from_values(vals, w, _meta("radial", K, desc, seed))


def section_distribution(
    K: StarBody, grid=None, samples=None, seed: int = 0, resolution: int = 512
) -> EmpiricalCDF:
    """S_K(t) = sigma(theta : |K ∩ theta^⊥| >= t).

    Bodies held as expansions of rho^2 in R^3 use the exact multiplier
    route for the section function; all others integrate over great
    subspheres.
    """
    nodes, w, desc = direction_sample(K.n, grid, samples, seed)
    if isinstance(K, HarmonicBody) and K.power == 2.0:
        from .harmonics import intersection_radial_expansion

        ik = intersection_radial_expansion(K.power_expansion)
        if grid is not None and grid.polar is not None:
            vals = ik.on_grid(grid)
        else:
            vals = ik.evaluate(nodes)
    else:
        vals = section_areas(K, nodes, resolution)
    return EmpiricalCDF.from_values(vals, w, _meta("section", K, desc, seed))


def projection_distribution(
    K, grid=None, samples=None, seed: int = 0, mesh_resolution=(256, 512)
) -> EmpiricalCDF:
    """Pi_K(t) = sigma(theta : |K | theta^⊥| >= t) for convex K.

    n=2 uses support functions, support-parametrized bodies in R^3 the
    cosine transform of their curvature function, other bodies in R^3 a
    boundary mesh.
    """
    nodes, w, desc = direction_sample(K.n, grid, samples, seed)
    if K.n == 2:
        vals = projection_lengths_2d(K, np.arctan2(nodes[:, 1], nodes[:, 0]))
    elif isinstance(K, SupportBody):
        from .harmonics import projection_support_expansion

        hp = projection_support_expansion(K)
        vals = hp.on_grid(grid) if grid is not None and grid.polar is not None else hp.evaluate(nodes)
    elif K.n == 3:
        vals = shadow_areas(K, nodes, mesh_resolution)
    else:
        raise ValueError("projection distributions implemented for n <= 3")
    return EmpiricalCDF.from_values(vals, w, _meta("projection", K, desc, seed))


# -- k-dimensional sections ------------------------------------------------


def _principal_split(frames: np.ndarray):
    """s_H = sin of the smallest principal angle between H and span(e1, e2);
    u_H = unit vector of span(e1, e2) orthogonal to the closest direction."""
    P = frames[:, :, :2]
    _, S, Vt = np.linalg.svd(P)
    s = np.sqrt(np.clip(1.0 - S[:, 0] ** 2, 0.0, 1.0))
    w = Vt[:, 0, :]
    u = np.column_stack([-w[:, 1], w[:, 0]])
    return s, u


def k_section_closed_form(planar: StarBody, frames: np.ndarray) -> np.ndarray:
    """(s_H^2 rho_0^{-2}(u_H) + 1 - s_H^2)^{-1/2} for each k-frame."""
    s, u = _principal_split(frames)
    r = planar.rho(u)
    return (s**2 * r**-2.0 + 1.0 - s**2) ** -0.5


def k_section_direct(K: StarBody, frames: np.ndarray, resolution: int = 64) -> np.ndarray:
    """|K ∩ H| = (1/k) int_{S^{k-1} ⊂ H} rho^k for k in {2, 3}."""
    count, k, n = frames.shape
    if k == 2:
        a = 2.0 * math.pi * np.arange(resolution) / resolution
        local = np.column_stack([np.cos(a), np.sin(a)])
        w = np.full(resolution, 2.0 * math.pi / resolution)
    elif k == 3:
        g = fine_grid(3, resolution // 2, resolution)
        local, w = g.nodes, g.weights * 4.0 * math.pi
    else:
        raise ValueError("direct k-sections implemented for k in {2, 3}")
    out = np.empty(count)
    step = max(1, 2_000_000 // local.shape[0])
    for lo in range(0, count, step):
        F = frames[lo : lo + step]
        pts = np.einsum("rk,bkn->brn", local, F)
        r = K.rho(pts.reshape(-1, n)).reshape(pts.shape[:2])
        out[lo : lo + step] = (r**k @ w) / k
    return out


def k_section_distribution(
    K: StarBody,
    k: int,
    samples: int = 100_000,
    seed: int = 0,
    method: str = "auto",
    resolution: int = 64,
) -> EmpiricalCDF:
    """sigma(H in Gr(n, k) : |K ∩ H| >= t) over Haar-random subspaces.

    ``method``: "closed" uses the closed form for lifted l2-sum bodies,
    "direct" integrates rho^k over the unit sphere of H, "auto" picks the
    closed form when the body carries its planar seed.
    """
    n = K.n
    if not 2 <= k <= n - 1:
        raise ValueError(f"k must satisfy 2 <= k <= n-1, got k={k}, n={n}")
    frames = sample_grassmannian_frames(n, k, samples, seed)
    if method == "auto":
        method = "closed" if isinstance(K, LiftedBody) and K.planar is not None else "direct"
    if method == "closed":
        if not isinstance(K, LiftedBody) or K.planar is None:
            raise ValueError("closed form needs a lifted body with its planar seed")
        vals = k_section_closed_form(K.planar, frames)
    elif method == "direct":
        if n == 3 and k == 2:
            normals = np.cross(frames[:, 0], frames[:, 1])
            vals = section_areas(K, normals)
        else:
            vals = k_section_direct(K, frames, resolution)
    else:
        raise ValueError(f"unknown method {method!r}")
    meta = _meta(f"{k}-section", K, f"grassmannian {samples} method={method}", seed)
    return EmpiricalCDF.from_values(vals, None, meta)


# -- comparisons -----------------------------------------------------------


def _snapped(F: EmpiricalCDF, G: EmpiricalCDF, rtol: float):
    """Both samples with values closer than rtol (relative) merged onto one
    representative, so floating-point splits of exact ties do not count as
    jumps; returns (F values, G values, merged jump points)."""
    u = np.union1d(F.samples, G.samples)
    if rtol <= 0 or u.size < 2:
        return F.samples, G.samples, u
    gap = np.diff(u) > rtol * np.maximum(np.abs(u[1:]), np.finfo(float).tiny)
    starts = u[np.concatenate([[True], gap])]

    def snap(x):
        return starts[np.searchsorted(starts, x, side="right") - 1]

    return snap(F.samples), snap(G.samples), starts


_PROB_EPS = 1e-12


def _tail_sums(w: np.ndarray) -> np.ndarray:
    # pinned so the full tail is exactly 1 and every entry lies in [0, 1]
    c = np.cumsum(w[::-1])[::-1]
    return np.concatenate([np.minimum(c / c[0], 1.0), [0.0]])


def _survivals(x, w, t):
    c = _tail_sums(w)
    return c[np.searchsorted(x, t, side="left")], c[np.searchsorted(x, t, side="right")]


def ks_distance(F: EmpiricalCDF, G: EmpiricalCDF, rtol: float = 1e-12) -> float:
    """sup_t |S_F(t) - S_G(t)| over the merged jump points (both one-sided limits).

    Values agreeing to ``rtol`` are treated as ties.
    """
    xf, xg, t = _snapped(F, G, rtol)
    f1, f2 = _survivals(xf, F.weights, t)
    g1, g2 = _survivals(xg, G.weights, t)
    return float(max(np.abs(f1 - g1).max(), np.abs(f2 - g2).max()))


def dominates(F: EmpiricalCDF, G: EmpiricalCDF, tol: float = 0.0, rtol: float = 1e-12) -> bool:
    """True iff S_F(t) <= S_G(t) + tol at every jump point (ties as in ks_distance).

    Probabilities are compared with an extra 1e-12 for summation roundoff.
    """
    xf, xg, t = _snapped(F, G, rtol)
    f1, f2 = _survivals(xf, F.weights, t)
    g1, g2 = _survivals(xg, G.weights, t)
    tol = tol + _PROB_EPS
    return bool(np.all(f1 <= g1 + tol) and np.all(f2 <= g2 + tol))


def moment_sequence(F: EmpiricalCDF, m_max: int, R: float) -> np.ndarray:
    """int_0^R t^m S_F(t) dt for m = 0..m_max, exact for the step function.

    For a sample x >= 0 the survival indicator contributes x^{m+1}/(m+1).
    """
    if F.samples[-1] > R:
        raise ValueError("samples exceed R")
    x = np.clip(F.samples, 0.0, None)
    m = np.arange(m_max + 1)
    return (x[None, :] ** (m[:, None] + 1) / (m[:, None] + 1)) @ F.weights

"""Spherical harmonic expansions on S^1 and S^2, Fourier multipliers of
homogeneous extensions, the spherical Radon transform and its inversion.

Real harmonics on S^2 are orthonormal for the Haar probability measure:

    Y_{m,0} = Pbar_m^0(cos phi)
    Y_{m,k} = Pbar_m^k(cos phi) cos(k psi),   k > 0
    Y_{m,-k} = Pbar_m^k(cos phi) sin(k psi),  k > 0

with ``Pbar`` the fully normalized associated Legendre functions (geodesy
normalization, no Condon-Shortley phase).  On S^1 an expansion is a plain
Fourier series ``a_0 + sum_k a_k cos(k u) + b_k sin(k u)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .sphere import QuadratureGrid, fine_grid, sphere_area, subsphere_grid

__all__ = [
    "HarmonicExpansion",
    "MultiplierTable",
    "legendre_table",
    "legendre_dphi",
    "expand",
    "fourier_multiplier",
    "paper_multiplier",
    "radon_eigenvalue",
    "cosine_eigenvalue",
    "radon_transform",
    "radon_via_multipliers",
    "intersection_radial_expansion",
    "inverse_intersection_expansion",
    "multiplier_monotonicity_report",
    "parseval_check",
    "fourier_of_power",
    "solve_minkowski",
    "intersection_body",
    "invert_intersection_body",
    "projection_support_expansion",
    "body_from_polar_projection_body",
    "frac_derivative_fourier",
    "curvature_function",
    "principal_radii",
]


def legendre_table(lmax: int, x) -> np.ndarray:
    """Fully normalized associated Legendre functions.

    Returns ``P`` with shape (lmax+1, lmax+1, len(x)); ``P[m, k]`` is
    Pbar_m^k(x) for k <= m and zero otherwise.  Column recurrences start
    from the sectoral terms, which keeps them stable to high degree.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    P = np.zeros((lmax + 1, lmax + 1, x.size))
    P[0, 0] = 1.0
    if lmax == 0:
        return P
    P[1, 1] = math.sqrt(3.0) * u
    for k in range(2, lmax + 1):
        P[k, k] = math.sqrt((2.0 * k + 1.0) / (2.0 * k)) * u * P[k - 1, k - 1]
    for k in range(0, lmax):
        P[k + 1, k] = math.sqrt(2.0 * k + 3.0) * x * P[k, k]
    for k in range(0, lmax + 1):
        for m in range(k + 2, lmax + 1):
            a = math.sqrt((2.0 * m - 1.0) * (2.0 * m + 1.0) / ((m - k) * (m + k)))
            b = math.sqrt(
                (2.0 * m + 1.0) * (m + k - 1.0) * (m - k - 1.0)
                / ((m - k) * (m + k) * (2.0 * m - 3.0))
            )
            P[m, k] = a * x * P[m - 1, k] - b * P[m - 2, k]
    return P


def legendre_dphi(P: np.ndarray, x) -> np.ndarray:
    """d/dphi of Pbar_m^k(cos phi), from a table made by :func:`legendre_table`.

    Uses sin(phi) dP_m^k/dphi = m cos(phi) P_m^k - c_mk P_{m-1}^k, so the
    nodes must avoid the poles.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.sqrt(1.0 - x * x)
    L = P.shape[0] - 1
    D = np.zeros_like(P)
    for m in range(1, L + 1):
        for k in range(0, m + 1):
            c = math.sqrt((2.0 * m + 1.0) * (m - k) * (m + k) / (2.0 * m - 1.0))
            D[m, k] = (m * x * P[m, k] - c * P[m - 1, k]) / s
    return D


def _angles(points: np.ndarray):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    points = points / np.linalg.norm(points, axis=1, keepdims=True)
    if points.shape[1] == 2:
        return np.arctan2(points[:, 1], points[:, 0]), None
    z = np.clip(points[:, 2], -1.0, 1.0)
    return np.arctan2(points[:, 1], points[:, 0]), z


@dataclass
class HarmonicExpansion:
    """Coefficients of a function on S^1 (n=2) or S^2 (n=3).

    n=2: ``coeffs`` has shape (L+1, 2) holding (a_k, b_k).
    n=3: ``coeffs`` has shape (L+1, 2L+1); entry [m, L+k] multiplies Y_{m,k}.
    """

    n: int
    L: int
    coeffs: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        shape = (self.L + 1, 2) if self.n == 2 else (self.L + 1, 2 * self.L + 1)
        if self.coeffs.shape != shape:
            raise ValueError(f"coeffs shape {self.coeffs.shape} != {shape}")

    # -- structure ---------------------------------------------------------
    def degree_block(self, m: int) -> np.ndarray:
        if self.n == 2:
            return self.coeffs[m].copy()
        return self.coeffs[m, self.L - m : self.L + m + 1].copy()

    def degree_norms(self) -> np.ndarray:
        """L2(sigma) norm of each degree-m component."""
        if self.n == 2:
            sq = self.coeffs[:, 0] ** 2 + self.coeffs[:, 1] ** 2
            sq[1:] *= 0.5
            return np.sqrt(sq)
        return np.sqrt(np.sum(self.coeffs**2, axis=1))

    def odd_norm(self) -> float:
        return float(np.sqrt(np.sum(self.degree_norms()[1::2] ** 2)))

    def mean(self) -> float:
        return float(self.coeffs[0, 0] if self.n == 2 else self.coeffs[0, self.L])

    def apply(self, multiplier) -> "HarmonicExpansion":
        """Scale each degree-m block by ``multiplier(m)`` (callable or array)."""
        if callable(multiplier):
            lam = np.array([multiplier(m) for m in range(self.L + 1)], dtype=float)
        else:
            lam = np.asarray(multiplier, dtype=float)
        return HarmonicExpansion(self.n, self.L, self.coeffs * lam[:, None], self.tail)

    def truncate(self, L: int) -> "HarmonicExpansion":
        if L >= self.L:
            return self
        if self.n == 2:
            c = self.coeffs[: L + 1]
        else:
            c = self.coeffs[: L + 1, self.L - L : self.L + L + 1]
        return HarmonicExpansion(self.n, L, c)

    def __add__(self, other: "HarmonicExpansion") -> "HarmonicExpansion":
        if (self.n, self.L) != (other.n, other.L):
            raise ValueError("expansions must share n and L")
        return HarmonicExpansion(self.n, self.L, self.coeffs + other.coeffs)

    def scale(self, c: float) -> "HarmonicExpansion":
        return HarmonicExpansion(self.n, self.L, c * self.coeffs, abs(c) * self.tail)

    # -- evaluation --------------------------------------------------------
    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)

    def evaluate(self, points, chunk: int = 8192) -> np.ndarray:
        psi, z = _angles(points)
        if self.n == 2:
            k = np.arange(self.L + 1)
            ang = np.outer(psi, k)
            return np.cos(ang) @ self.coeffs[:, 0] + np.sin(ang) @ self.coeffs[:, 1]
        out = np.empty(psi.size)
        for lo in range(0, psi.size, chunk):
            sl = slice(lo, lo + chunk)
            out[sl] = self._eval_s2(psi[sl], z[sl])
        return out

    def _eval_s2(self, psi, z):
        L = self.L
        P = legendre_table(L, z)
        ccos = self.coeffs[:, L:]  # k = 0..L
        csin = self.coeffs[:, L::-1]  # k = 0..L (k=0 column is the cos one, unused)
        Ac = np.einsum("mk,mkn->kn", ccos, P)
        As = np.einsum("mk,mkn->kn", csin, P)
        k = np.arange(L + 1)[:, None]
        ang = k * psi[None, :]
        As[0] = 0.0
        return np.sum(Ac * np.cos(ang) + As * np.sin(ang), axis=0)

    def on_grid(self, grid: QuadratureGrid) -> np.ndarray:
        """Values at the nodes of a product grid (fast separable path)."""
        if self.n == 2:
            return self.evaluate(grid.nodes)
        if grid.polar is None:
            return self.evaluate(grid.nodes)
        _, x, _ = grid.polar
        psi = grid.azimuth
        Ac, As = self._latitude_sums(legendre_table(self.L, x))
        k = np.arange(self.L + 1)
        vals = Ac.T @ np.cos(np.outer(k, psi)) + As.T @ np.sin(np.outer(k, psi))
        return vals.ravel()

    def _latitude_sums(self, P):
        L = self.L
        Ac = np.einsum("mk,mkn->kn", self.coeffs[:, L:], P)
        As = np.einsum("mk,mkn->kn", self.coeffs[:, L::-1], P)
        As[0] = 0.0
        return Ac, As

    def derivatives_on_grid(self, grid: QuadratureGrid) -> dict:
        """f, f_phi, f_psi, f_phiphi, f_phipsi, f_psipsi on a product grid (n=3)."""
        if self.n != 3 or grid.polar is None:
            raise ValueError("derivatives need an S^2 product grid")
        phi, x, _ = grid.polar
        psi = grid.azimuth
        L = self.L
        P = legendre_table(L, x)
        D = legendre_dphi(P, x)
        s = np.sqrt(1.0 - x * x)
        m = np.arange(L + 1)[:, None, None]
        kk = np.arange(L + 1)[None, :, None]
        # Legendre ODE in phi: P'' = -cot P' - (m(m+1) - k^2/sin^2) P
        D2 = -(x / s) * D - (m * (m + 1) - kk**2 / s**2) * P
        k = np.arange(L + 1)
        C = np.cos(np.outer(k, psi))
        S = np.sin(np.outer(k, psi))

        def synth(T, dpsi):
            Ac, As = self._latitude_sums(T)
            if dpsi == 0:
                return Ac.T @ C + As.T @ S
            if dpsi == 1:
                return (As * k[:, None]).T @ C - (Ac * k[:, None]).T @ S
            return -((Ac * k[:, None] ** 2).T @ C + (As * k[:, None] ** 2).T @ S)

        return {
            "f": synth(P, 0),
            "f_phi": synth(D, 0),
            "f_psi": synth(P, 1),
            "f_phiphi": synth(D2, 0),
            "f_phipsi": synth(D, 1),
            "f_psipsi": synth(P, 2),
            "phi": phi,
            "psi": psi,
        }

    # -- serialization -----------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "order", "coefficient"])
        if self.n == 2:
            for m in range(self.L + 1):
                w.writerow([m, m, repr(float(self.coeffs[m, 0]))])
                if m > 0:
                    w.writerow([m, -m, repr(float(self.coeffs[m, 1]))])
        else:
            for m in range(self.L + 1):
                for k in range(-m, m + 1):
                    w.writerow([m, k, repr(float(self.coeffs[m, self.L + k]))])
        return f"# n={self.n} L={self.L}\n" + buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "HarmonicExpansion":
        lines = text.splitlines()
        head = dict(tok.split("=") for tok in lines[0].lstrip("# ").split())
        n, L = int(head["n"]), int(head["L"])
        c = np.zeros((L + 1, 2) if n == 2 else (L + 1, 2 * L + 1))
        for row in csv.DictReader(lines[1:]):
            m, k, v = int(row["degree"]), int(row["order"]), float(row["coefficient"])
            if n == 2:
                c[m, 0 if k >= 0 else 1] = v
            else:
                c[m, L + k] = v
        return cls(n, L, c)


def _analysis_grid(n: int, L: int) -> QuadratureGrid:
    if n == 2:
        return fine_grid(2, max(8, 4 * L + 4))
    return fine_grid(3, 2 * L + 2, 4 * L + 4)


def expand(f, L: int, grid: QuadratureGrid | None = None, n: int | None = None) -> HarmonicExpansion:
    """Harmonic coefficients of ``f`` up to degree ``L``.

    ``f`` is a callable on (N, n) arrays of unit vectors, or an array of
    values at the nodes of ``grid``.  The grid must resolve degree 2L
    (n=3: at least L+1 Gauss nodes and 2L+1 azimuths).  The tail estimate
    stored on the result is the norm of the top two degrees.
    """
    if grid is None:
        if n is None:
            n = getattr(f, "n", None)
        if n is None:
            raise ValueError("need a grid or the dimension n")
        grid = _analysis_grid(n, L)
    n = grid.n
    if n not in (2, 3):
        raise ValueError("expansions are limited to S^1 and S^2")
    values = f(grid.nodes) if callable(f) else np.asarray(f, dtype=float)
    if n == 2:
        N = len(grid)
        if N <= 2 * L:
            raise ValueError(f"grid too coarse for L={L}: {N} angles")
        a = grid.azimuth
        if not np.allclose(a, 2 * math.pi * np.arange(N) / N):
            raise ValueError("S^1 expansions need an equispaced grid")
        F = np.fft.rfft(values)[: L + 1] / N
        c = np.zeros((L + 1, 2))
        c[:, 0] = 2.0 * F.real
        c[:, 1] = -2.0 * F.imag
        c[0, 0] = F[0].real
        c[0, 1] = 0.0
    else:
        if grid.polar is None:
            raise ValueError("S^2 expansions need a product grid")
        _, x, wx = grid.polar
        npsi = grid.azimuth.size
        if x.size < L + 1 or npsi < 2 * L + 1:
            raise ValueError(
                f"grid too coarse for L={L}: need >= {L + 1} polar and "
                f">= {2 * L + 1} azimuthal nodes"
            )
        V = values.reshape(x.size, npsi)
        F = np.fft.rfft(V, axis=1)[:, : L + 1] / npsi
        P = legendre_table(L, x)
        Fc = F.real * wx[:, None]
        Fs = -F.imag * wx[:, None]
        c = np.zeros((L + 1, 2 * L + 1))
        cos_part = np.einsum("mkn,nk->mk", P, Fc)
        sin_part = np.einsum("mkn,nk->mk", P, Fs)
        c[:, L:] = cos_part
        c[:, L - 1 :: -1] = sin_part[:, 1:]
        mask = np.abs(np.arange(-L, L + 1))[None, :] <= np.arange(L + 1)[:, None]
        c *= mask
    exp_ = HarmonicExpansion(n, L, c)
    norms = exp_.degree_norms()
    exp_.tail = float(np.sqrt(np.sum(norms[max(0, L - 1) :] ** 2)))
    return exp_


# -- multipliers -----------------------------------------------------------


def _check_q(n: int, q: float, m: int):
    if not -1.0 < q < n - 1:
        raise ValueError(f"q={q} outside (-1, n-1)")
    if m % 2:
        raise ValueError("multipliers are defined for even degrees")


def fourier_multiplier(n: int, q: float, m: int) -> float:
    """Fourier multiplier for degree-m harmonics extended with homogeneity -q-1.

    Classical normalization (unitary-free transform ``int f e^{-i<x,xi>}``):

        2^{n-q-1} pi^{n/2} (-1)^{m/2} Gamma((m+n-q-1)/2) / Gamma((m+q+1)/2)

    It reproduces the transforms of |x|^{-q-1} at m=0 (n=3: 4pi at q=0,
    2pi^2 at q=1).
    """
    _check_q(n, q, m)
    a = (m + n - q - 1) / 2.0
    b = (m + q + 1) / 2.0
    if a <= 0 or b <= 0:
        raise ValueError("Gamma pole: excluded value of q")
    log = (n - q - 1) * math.log(2.0) + (n / 2.0) * math.log(math.pi) + gammaln(a) - gammaln(b)
    return (-1.0) ** (m // 2) * math.exp(log)


def paper_multiplier(n: int, q: float, m: int) -> float:
    """Same multiplier with the prefactor 2^{n-1} pi^{n/2} as printed.

    Differs from :func:`fourier_multiplier` by the m-independent factor 2^q.
    """
    return fourier_multiplier(n, q, m) * 2.0**q


def radon_eigenvalue(m: int, n: int = 3) -> float:
    """Eigenvalue of the spherical Radon transform on degree-m harmonics.

    Obtained from the Fourier multiplier at homogeneity -n+1 divided by pi;
    zero on odd degrees.
    """
    if m % 2:
        return 0.0
    return fourier_multiplier(n, n - 2, m) / math.pi


def cosine_eigenvalue(m: int) -> float:
    """Eigenvalue of f -> int_{S^2} |<xi, theta>| f(theta) dtheta on degree m.

    Funk-Hecke: 2 pi int_{-1}^1 |t| P_m(t) dt, evaluated exactly with a
    Gauss-Legendre rule on each half interval.
    """
    if m % 2:
        return 0.0
    t, w = np.polynomial.legendre.leggauss(m // 2 + 2)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    pm = np.polynomial.legendre.legval(t, [0] * m + [1])
    return float(2.0 * math.pi * 2.0 * np.sum(w * t * pm))


@dataclass
class MultiplierTable:
    n: int
    q: float
    values: np.ndarray = field(repr=False)

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(0, 2 * len(self.values), 2)

    def verdict(self) -> str:
        mags = np.abs(self.values[1:])
        if np.ptp(mags) <= 1e-12 * mags.max():
            return "constant"
        if np.all(mags[0] < mags[1:]):
            return "lambda_2 smallest"
        if np.all(mags[0] > mags[1:]):
            return "lambda_2 largest"
        return "mixed"


def multiplier_monotonicity_report(n: int, q: float, m_max: int):
    """Magnitudes |lambda_m| for even m <= m_max and the comparison verdict.

    Returns ``(rows, verdict)`` with rows (m, |lambda_m|) for m = 2, 4, ...
    and verdict one of "constant", "lambda_2 smallest", "lambda_2 largest"
    or "mixed" (comparing |lambda_2| with all higher degrees).
    """
    ms = list(range(0, m_max + 1, 2))
    table = MultiplierTable(n, q, np.array([fourier_multiplier(n, q, m) for m in ms]))
    rows = [(m, abs(v)) for m, v in zip(ms, table.values) if m >= 2]
    return rows, table.verdict()


def parseval_check(expansion: HarmonicExpansion, q: float) -> tuple[float, float]:
    """Both sides of sum_m lambda_m^2 |f_m|^2 = lambda^2 |f|^2 (n=3, even f).

    Meaningful at q = n/2 - 1 where |lambda_m| does not depend on m.
    Returns (lhs, rhs) with lambda taken from degree 0.
    """
    norms = expansion.degree_norms()
    lam = np.array(
        [fourier_multiplier(3, q, m) if m % 2 == 0 else 0.0 for m in range(expansion.L + 1)]
    )
    lhs = float(np.sum(lam**2 * norms**2))
    rhs = float(lam[0] ** 2 * np.sum(norms[0::2] ** 2))
    return lhs, rhs


# -- Radon transform -------------------------------------------------------


def radon_transform(f, theta, resolution: int = 512) -> np.ndarray:
    """Direct route: integrate ``f`` over the great subsphere orthogonal to theta.

    ``theta`` may be one vector or an (M, n) array; ``f`` is a callable on
    (N, n) arrays.  Uses the unnormalized subsphere measure.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    n = theta.shape[1]
    if n == 3:
        nodes, w = _great_circles(theta, resolution)
        vals = f(nodes.reshape(-1, 3)).reshape(nodes.shape[:2])
        return vals @ w
    out = np.empty(theta.shape[0])
    for i, t in enumerate(theta):
        g = subsphere_grid(t, resolution)
        out[i] = g.integrate(f(g.nodes))
    return out


def _great_circles(theta: np.ndarray, resolution: int):
    """Equispaced nodes on the great circles theta^⊥ (M, R, 3) and weights."""
    theta = theta / np.linalg.norm(theta, axis=1, keepdims=True)
    ref = np.where(np.abs(theta[:, [0]]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    a = np.cross(theta, ref)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b = np.cross(theta, a)
    t = 2.0 * math.pi * np.arange(resolution) / resolution
    nodes = np.cos(t)[None, :, None] * a[:, None, :] + np.sin(t)[None, :, None] * b[:, None, :]
    return nodes, np.full(resolution, 2.0 * math.pi / resolution)


def radon_via_multipliers(expansion: HarmonicExpansion, tol: float = 1e-12) -> HarmonicExpansion:
    """Multiplier route for the Radon transform of an even function on S^2."""
    if expansion.n != 3:
        raise ValueError("multiplier route implemented for n = 3")
    scale = max(1.0, float(np.abs(expansion.coeffs).max()))
    if expansion.odd_norm() > tol * scale:
        raise ValueError("odd-degree content: the Radon transform annihilates it")
    return expansion.apply(lambda m: radon_eigenvalue(m, 3))


def intersection_radial_expansion(rho_expansion_pow: HarmonicExpansion) -> HarmonicExpansion:
    """Radial function of IK from the expansion of rho_K^{n-1} (n=3).

    rho_IK = (1/(n-1)) R(rho_K^{n-1}).
    """
    return radon_via_multipliers(rho_expansion_pow).scale(0.5)


def inverse_intersection_expansion(target: HarmonicExpansion) -> HarmonicExpansion:
    """Expansion of rho_K^{n-1} whose intersection body has radial ``target``.

    Applies the degree-wise multipliers of the Fourier transform at
    homogeneity -1 and the constant (2pi)^n c_1, c_1 = 1/(pi(n-1)); n = 3.
    """
    if target.n != 3:
        raise ValueError("inversion implemented for n = 3")
    n = 3
    c1 = 1.0 / (math.pi * (n - 1))
    const = (2.0 * math.pi) ** n * c1
    scale = max(1.0, float(np.abs(target.coeffs).max()))
    if target.odd_norm() > 1e-12 * scale:
        raise ValueError("target must be even")
    return target.apply(
        lambda m: fourier_multiplier(n, 0.0, m) / const if m % 2 == 0 else 0.0
    )


def fourier_of_power(expansion_pow: HarmonicExpansion, q: float) -> HarmonicExpansion:
    """Fourier transform on S^2 of a function extended with homogeneity -q-1.

    ``expansion_pow`` holds the restriction to the sphere; the result is the
    restriction of the transform (homogeneous of degree -n+q+1).
    """
    return expansion_pow.apply(
        lambda m: fourier_multiplier(3, q, m) if m % 2 == 0 else 0.0
    )


# -- Minkowski problem -----------------------------------------------------


def _hessian_form(d: dict):
    """Entries of (Hess h + h I) in the orthonormal (e_phi, e_psi) frame."""
    phi = d["phi"][:, None]
    s = np.sin(phi)
    c = np.cos(phi)
    h = d["f"]
    a11 = d["f_phiphi"] + h
    a12 = (d["f_phipsi"] - (c / s) * d["f_psi"]) / s
    a22 = d["f_psipsi"] / s**2 + (c / s) * d["f_phi"] + h
    return a11, a12, a22


def curvature_function(h: HarmonicExpansion, grid: QuadratureGrid) -> np.ndarray:
    """det(Hess h + h I) on a product grid: the product of principal radii."""
    a11, a12, a22 = _hessian_form(h.derivatives_on_grid(grid))
    return (a11 * a22 - a12**2).ravel()


def principal_radii(h: HarmonicExpansion, grid: QuadratureGrid) -> np.ndarray:
    """Eigenvalues of (Hess h + h I), shape (2, N); both positive iff convex."""
    a11, a12, a22 = _hessian_form(h.derivatives_on_grid(grid))
    tr = a11 + a22
    disc = np.sqrt(np.maximum(((a11 - a22) / 2.0) ** 2 + a12**2, 0.0))
    return np.stack([(tr / 2.0 - disc).ravel(), (tr / 2.0 + disc).ravel()])


def solve_minkowski(
    f: HarmonicExpansion, L: int | None = None, tol: float = 1e-13, max_iter: int = 200
) -> HarmonicExpansion:
    """Support function of the even convex body with curvature function ``f``.

    Solves det(Hess h + h I) = f on S^2 by the fixed point
    (Delta + 2) v = (f - c^2 - det(Hess v + v I)) / c with h = c + v,
    c^2 the mean of f.  Converges for f close to a constant.
    """
    if f.n != 3:
        raise ValueError("Minkowski solver implemented on S^2")
    L = f.L if L is None else L
    grid = _analysis_grid(3, L)
    fvals = f.on_grid(grid)
    c = math.sqrt(f.mean())
    m = np.arange(L + 1)
    inv = np.zeros(L + 1)
    inv[m != 1] = 1.0 / (2.0 - m[m != 1] * (m[m != 1] + 1.0))
    v = HarmonicExpansion(3, L, np.zeros((L + 1, 2 * L + 1)))
    for _ in range(max_iter):
        a11, a12, a22 = _hessian_form(v.derivatives_on_grid(grid))
        rhs = (fvals - c * c - (a11 * a22 - a12**2).ravel()) / c
        new = expand(rhs, L, grid).apply(inv)
        step = float(np.abs(new.coeffs - v.coeffs).max())
        v = new
        if step < tol:
            break
    else:
        raise RuntimeError("Minkowski fixed point did not converge")
    v.coeffs[0, L] += c
    return v



# -- bodies from prescribed sections and projections -----------------------


def intersection_body(K, resolution: int = 512):
    """Star body IK with rho_IK(theta) = |K ∩ theta^⊥|.

    Bodies held as harmonic expansions of rho^2 (n=3) go through the
    multiplier route; everything else through direct section areas.
    """
    from .bodies import HarmonicBody, StarBody
    from .functionals import section_areas

    spec = f"I({K.spec})"
    if isinstance(K, HarmonicBody) and K.power == 2.0:
        return HarmonicBody(intersection_radial_expansion(K.power_expansion), 1.0, spec)
    return StarBody(K.n, lambda p: section_areas(K, p, resolution), K.even, spec)


def _as_callable(target):
    return target.rho if hasattr(target, "rho") else target


def invert_intersection_body(target, L: int = 24):
    """Star body K in R^3 whose intersection body has radial function ``target``.

    rho_K^2 is obtained from the expansion of rho_target by the inverse
    Radon multipliers; K is returned as a :class:`HarmonicBody`.
    """
    from .bodies import HarmonicBody

    if getattr(target, "n", 3) != 3:
        raise ValueError("inversion implemented for n = 3")
    grid = _analysis_grid(3, L)
    rho_t = expand(_as_callable(target), L, grid)
    pow_exp = inverse_intersection_expansion(_even_part(rho_t))
    if np.any(pow_exp.on_grid(grid) <= 0):
        raise ValueError("target is not the intersection body of a star body at this eps")
    spec = f"invIK({getattr(target, 'spec', 'target')}, L={L})"
    return HarmonicBody(pow_exp, 2.0, spec)


def _even_part(e: HarmonicExpansion) -> HarmonicExpansion:
    return e.apply(lambda m: 1.0 if m % 2 == 0 else 0.0)


def projection_support_expansion(K, L: int | None = None) -> HarmonicExpansion:
    """Expansion of h_{Pi K}(theta) = |K | theta^⊥| for a support-parametrized body.

    |K | theta^⊥| = (1/2) int |<xi, theta>| f_K(xi) dxi with f_K the
    curvature function, so it is the cosine transform of f_K / 2.
    """
    h = K.h_expansion
    L2 = L or 2 * h.L
    grid = _analysis_grid(3, L2)
    f = expand(curvature_function(h, grid), L2, grid)
    return f.apply(lambda m: 0.5 * cosine_eigenvalue(m))


def body_from_polar_projection_body(target, L: int = 24):
    """Convex body K in R^3 whose polar projection body has radial ``target``.

    h_{Pi K} = 1 / rho_target.  The curvature function is recovered from
    the inverse cosine transform and K from the Minkowski problem.
    """
    from .bodies import SupportBody

    grid = _analysis_grid(3, L)
    rho = _as_callable(target)
    h_pi = _even_part(expand(lambda p: 1.0 / rho(p), L, grid))
    f = h_pi.apply(lambda m: 2.0 / cosine_eigenvalue(m) if m % 2 == 0 else 0.0)
    if np.any(f.on_grid(grid) <= 0):
        raise ValueError("target is not a polar projection body at this eps")
    h = solve_minkowski(f)
    spec = f"projinv({getattr(target, 'spec', 'target')}, L={L})"
    K = SupportBody(h, spec)
    if np.any(K.principal_radii() <= 0):
        raise ValueError("Minkowski solution is not convex")
    return K


def frac_derivative_fourier(K, thetas, q: float, L: int = 24) -> np.ndarray:
    """A_{K,theta}^{(q)}(0) through the Fourier route in R^3.

    cos(pi q/2) / (pi (n-q-1)) times the Fourier transform of
    ||x||_K^{-n+q+1}, whose restriction to the sphere is rho^{n-q-1}
    scaled degree-wise by the multiplier at homogeneity -(n-q-1).
    """
    n = 3
    if not -1.0 < q < 1.0 or q == 0.0:
        raise ValueError("q must lie in (-1, 0) or (0, 1)")
    p = n - q - 1
    e = _even_part(expand(lambda x: K.rho(x) ** p, L, _analysis_grid(3, L)))
    ft = e.apply(lambda m: fourier_multiplier(n, p - 1.0, m) if m % 2 == 0 else 0.0)
    return math.cos(math.pi * q / 2.0) / (math.pi * p) * ft.evaluate(np.atleast_2d(thetas))


def _register():
    from .bodies import parse_body, register_body  # noqa: F401

    register_body("invIK")(
        lambda bodies, kw: invert_intersection_body(bodies[0], int(kw.get("L", 24)))
    )
    register_body("projinv")(
        lambda bodies, kw: body_from_polar_projection_body(bodies[0], int(kw.get("L", 24)))
    )


_register()

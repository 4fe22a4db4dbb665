"""Numerical checks of the Busemann intersection, Petty projection and
planar Blaschke-Santalo inequalities, and the section-moment statistic
bounded in terms of the isotropic constant.

Each report carries an error estimate from halving the resolution of
every grid involved: numerical_error = |Q(r) - Q(r/2)|, floored at
1e-12 |Q(r)|.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .bodies import HarmonicBody, StarBody, SupportBody, ball
from .functionals import (
    polar_volume_2d,
    section_areas,
    shadow_areas,
    volume,
)
from .sphere import ball_volume, fine_grid, sphere_area

__all__ = [
    "InequalityReport",
    "busemann_intersection",
    "busemann_constant",
    "petty_projection",
    "petty_constant",
    "blaschke_santalo_2d",
    "mp_section_ratio",
    "intersection_body_volume",
    "polar_projection_volume",
]

_FLOOR = 1e-12


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    equality_expected: bool
    numerical_error: float
    body: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def build(cls, name, lhs, rhs, err, equality_expected, body=""):
        return cls(name, float(lhs), float(rhs), float(rhs - lhs), bool(lhs <= rhs + err),
                   bool(equality_expected), float(err), body)


def _err(fine: float, coarse: float) -> float:
    return max(abs(fine - coarse), _FLOOR * abs(fine))


def _is_ellipsoid(K) -> bool:
    return K.spec.startswith(("ellipsoid", "ball"))


def _grid3(r: int):
    return fine_grid(3, r, 2 * r)


def intersection_body_volume(K: StarBody, resolution: int = 32) -> float:
    """|IK| = (|S^2|/3) E_sigma[|K ∩ theta^⊥|^3] (n=3)."""
    g = _grid3(resolution)
    if isinstance(K, HarmonicBody) and K.power == 2.0:
        from .harmonics import intersection_radial_expansion

        r = intersection_radial_expansion(K.power_expansion).on_grid(g)
    else:
        r = section_areas(K, g.nodes, 16 * resolution)
    return sphere_area(3) / 3.0 * g.integrate(r**3)


def _volume_at(K, resolution: int) -> float:
    if isinstance(K, SupportBody):
        # exact for the band-limited integrand h * det(Hess h + h I)
        return volume(K)
    return volume(K, _grid3(resolution))


def busemann_constant(resolution: int = 32) -> float:
    """c(3) = |I B| / |B|^2 measured with the same quadrature (about 3 pi^2 / 4)."""
    B = ball(3, 1.0)
    return intersection_body_volume(B, resolution) / volume(B, _grid3(resolution)) ** 2


def busemann_intersection(K: StarBody, resolution: int = 64) -> InequalityReport:
    """|IK| <= c(3) |K|^2, equality for centered ellipsoids."""
    if K.n != 3:
        raise ValueError("Busemann check implemented for n = 3")
    c = busemann_constant(resolution)

    def sides(r):
        return intersection_body_volume(K, r), c * _volume_at(K, r) ** 2

    l1, r1 = sides(resolution)
    l0, r0 = sides(resolution // 2)
    err = _err(l1, l0) + _err(r1, r0)
    return InequalityReport.build("busemann_intersection", l1, r1, err, _is_ellipsoid(K), K.spec)


def polar_projection_volume(K, resolution: int = 16, mesh_resolution=(256, 512)) -> float:
    """|(Pi K)°| = (|S^2|/3) E_sigma[|K | theta^⊥|^{-3}]."""
    g = _grid3(resolution)
    if isinstance(K, SupportBody):
        from .harmonics import projection_support_expansion

        sh = projection_support_expansion(K).on_grid(g)
    else:
        sh = shadow_areas(K, g.nodes, mesh_resolution, check=False)
    return sphere_area(3) / 3.0 * g.integrate(sh**-3.0)


def _petty_lhs(K, resolution, mesh_resolution):
    vol = _volume_at(K, max(resolution, 32))
    pp = polar_projection_volume(K, resolution, mesh_resolution)
    return vol ** (2.0 / 3.0) * pp ** (1.0 / 3.0)


def petty_constant() -> float:
    """|B_2^3| / |B_2^2| = 4/3."""
    return ball_volume(3) / ball_volume(2)


def petty_projection(K, resolution: int = 32, mesh_resolution=(256, 512)) -> InequalityReport:
    """|K|^{2/3} |(Pi K)°|^{1/3} <= |B_2^3| / |B_2^2|, equality for ellipsoids."""
    if K.n != 3:
        raise ValueError("Petty check implemented for n = 3")
    if not isinstance(K, SupportBody) and K.convex_hint is not True:
        from .bodies import convexity_check

        if not convexity_check(K).convex:
            raise ValueError("petty_projection needs a convex body")
    l1 = _petty_lhs(K, resolution, mesh_resolution)
    half = (mesh_resolution[0] // 2, mesh_resolution[1] // 2)
    l0 = _petty_lhs(K, resolution // 2, half)
    return InequalityReport.build(
        "petty_projection", l1, petty_constant(), _err(l1, l0), _is_ellipsoid(K), K.spec
    )


def blaschke_santalo_2d(K, resolution: int = 4096) -> InequalityReport:
    """|K| |K°| <= pi^2 for origin-symmetric planar convex K."""
    if K.n != 2:
        raise ValueError("planar check")

    def lhs(r):
        return volume(K, fine_grid(2, r)) * polar_volume_2d(K, r)

    l1, l0 = lhs(resolution), lhs(resolution // 2)
    return InequalityReport.build(
        "blaschke_santalo_2d", l1, math.pi**2, _err(l1, l0), _is_ellipsoid(K) or K.spec.startswith("E0"),
        K.spec,
    )


def mp_section_ratio(K: StarBody, resolution: int = 32) -> float:
    """(E_sigma |K ∩ theta^⊥|^3)^{1/3} / |K|^{2/3} in R^3."""
    g = _grid3(resolution)
    if isinstance(K, HarmonicBody) and K.power == 2.0:
        from .harmonics import intersection_radial_expansion

        s = intersection_radial_expansion(K.power_expansion).on_grid(g)
    else:
        s = section_areas(K, g.nodes, 16 * resolution)
    return float(g.integrate(s**3) ** (1.0 / 3.0) / _volume_at(K, resolution) ** (2.0 / 3.0))

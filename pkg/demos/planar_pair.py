"""Two planar bodies whose radial functions are rearrangements of each other.

K0 and E0 have the same distribution of rho over the circle, hence the
same area and the same distribution of chord lengths through the origin.
Their polars, however, have different areas: the ellipse E0 attains the
Blaschke-Santalo bound and K0 does not.
"""
import math

from geomtomo import (
    blaschke_santalo_2d,
    ks_distance,
    planar_seed,
    radial_distribution,
    section_distribution,
    volume,
)
from geomtomo.sphere import fine_grid

grid = fine_grid(2, 4096)

print("eps    |K0|         |E0|         KS(rho)    KS(chords)")
for eps in (0.05, 0.1, 0.2, 0.3):
    K0, E0 = planar_seed("K0", eps), planar_seed("E0", eps)
    ks_r = ks_distance(radial_distribution(K0, grid), radial_distribution(E0, grid))
    ks_c = ks_distance(section_distribution(K0, grid), section_distribution(E0, grid))
    print(f"{eps:<6} {volume(K0, grid):.10f} {volume(E0, grid):.10f} {ks_r:.2e}   {ks_c:.2e}")
print(f"closed form pi/sqrt(1+eps) at eps=0.3: {math.pi / math.sqrt(1.3):.10f}")

print()
print("Blaschke-Santalo products |K||K°| (bound pi^2 = %.6f)" % math.pi**2)
for eps in (0.1, 0.3):
    for kind in ("E0", "K0"):
        r = blaschke_santalo_2d(planar_seed(kind, eps))
        print(f"  {kind} eps={eps}: {r.lhs:.6f}  slack {r.slack:.3e}  (+-{r.numerical_error:.1e})")

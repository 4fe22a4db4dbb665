"""Bodies in R^3 with equal section distributions and different volumes.

The targets K0 (+)2 B and E0 (+)2 B have equally distributed radial
functions.  Inverting the intersection-body map gives bodies K and L whose
central section areas are those targets, so S_K = S_L, while the
Busemann intersection inequality separates their volumes: L is an
ellipsoid (equality), K is not.

The K0 target is only C^{1,1} along the e3 axis, so the inversion at
degree L converges slowly.  The last table shows the KS distance shrinking
roughly like 1/L.
"""
from geomtomo import (
    ball,
    busemann_intersection,
    invert_intersection_body,
    ks_distance,
    l2_sum,
    planar_seed,
    section_distribution,
    volume,
)
from geomtomo.sphere import fine_grid

eps = 0.1
tK = l2_sum(planar_seed("K0", eps), ball(1, 1))
tL = l2_sum(planar_seed("E0", eps), ball(1, 1))
grid = fine_grid(3, 64, 4096)

K = invert_intersection_body(tK, 24)
L = invert_intersection_body(tL, 24)
print(f"|K| = {volume(K, fine_grid(3, 64)):.9f}   |L| = {volume(L, fine_grid(3, 64)):.9f}")
for name, body in (("K", K), ("L", L)):
    r = busemann_intersection(body)
    print(f"Busemann {name}: |I{name}| = {r.lhs:.6f}, c|{name}|^2 = {r.rhs:.6f}, "
          f"slack {r.slack:.3e} (+-{r.numerical_error:.1e})")

print()
print("degree   KS(S_K, S_L)")
for deg in (16, 24, 32, 48, 64):
    Kd = invert_intersection_body(tK, deg)
    Ld = invert_intersection_body(tL, deg)
    ks = ks_distance(section_distribution(Kd, grid), section_distribution(Ld, grid))
    print(f"{deg:>6}   {ks:.2e}")

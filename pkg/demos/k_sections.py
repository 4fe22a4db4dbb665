"""2-dimensional sections of lifted bodies in R^4.

The lifted bodies K and L are rotation invariant in their last two
coordinates.  Their 2-section areas follow the closed form
(s^2 rho0(u)^-2 + 1 - s^2)^-1/2 with rho0 the planar seed.  The two
section distributions agree with each other to sampling accuracy, but
neither equals the distribution of the planar seed's radial function: s
is rarely 1, so the closed form piles up near 1.
"""
import numpy as np

from geomtomo import ks_distance, planar_seed, radial_distribution
from geomtomo.distributions import EmpiricalCDF, k_section_closed_form
from geomtomo.sphere import fine_grid, sample_grassmannian_frames

eps = 0.1
frames = sample_grassmannian_frames(4, 2, 100_000, seed=1)
K0, E0 = planar_seed("K0", eps), planar_seed("E0", eps)
FK = EmpiricalCDF.from_values(k_section_closed_form(K0, frames))
FL = EmpiricalCDF.from_values(k_section_closed_form(E0, frames))
g = fine_grid(2, 4096)
RK, RE = radial_distribution(K0, g), radial_distribution(E0, g)

print(f"KS(K sections, L sections) = {ks_distance(FK, FL):.4f}")
print(f"KS(K sections, rho_K0)     = {ks_distance(FK, RK):.4f}")
print(f"KS(L sections, rho_E0)     = {ks_distance(FL, RE):.4f}")
print()
print("quantile   K sections   rho_K0")
for p in (0.05, 0.25, 0.5, 0.75, 0.95):
    print(f"{p:>8}   {np.quantile(FK.samples, p):.6f}     {np.quantile(RK.samples, p):.6f}")

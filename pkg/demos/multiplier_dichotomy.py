"""Fourier multipliers of homogeneous extensions and fractional derivatives.

|lambda_m| is constant in the even degree m exactly at q = n/2 - 1; below
that value lambda_2 is the smallest magnitude, above it the largest.  The
ball's fractional derivative of the parallel section function is computed
both by direct quadrature and through the multiplier.
"""
import math

import numpy as np

from geomtomo import ball, ellipsoid, frac_derivative
from geomtomo.harmonics import frac_derivative_fourier, multiplier_monotonicity_report

for n, q in ((4, 0.5), (4, 1.0), (4, 1.5), (3, 0.0), (3, 0.5)):
    rows, verdict = multiplier_monotonicity_report(n, q, 12)
    mags = "  ".join(f"{v:9.4f}" for _, v in rows)
    print(f"n={n} q={q:<4} |lambda_2..12| = {mags}   -> {verdict}")

print()
e3 = np.array([0.0, 0.0, 1.0])
print("q      direct        fourier       (ball)")
for q in (-0.75, -0.5, -0.25, 0.25, 0.5, 0.75):
    d = frac_derivative(ball(3, 1), e3, q)
    f = frac_derivative_fourier(ball(3, 1), e3[None, :], q, L=8)[0]
    print(f"{q:<6} {d:.10f}  {f:.10f}")
print(f"1.6 sqrt(pi) = {1.6 * math.sqrt(math.pi):.10f}")

E = ellipsoid([1.0, 1.2, 0.9])
theta = np.array([0.48, 0.6, 0.64])
print()
print("ellipsoid, q=-0.5: direct %.8f, fourier %.8f" % (
    frac_derivative(E, theta, -0.5), frac_derivative_fourier(E, theta[None, :], -0.5, L=32)[0]))

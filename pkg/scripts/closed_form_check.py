"""Compare the angular closed form of the inner area against quadrature on a grid."""

import numpy as np

from ringcoord.geometry import RingModelParams, closed_form_discrepancy

R = 10.0

print(" n  offset   quadrature   closed form   rel.err   agrees  D^2-R^2>=rho^2")
for n in range(2, 7):
    for off in np.linspace(0, 0.99 * R, 12):
        c = closed_form_discrepancy(RingModelParams(R, n), float(off))
        d = (n - 1) * R + off
        sector_ok = d**2 - R**2 >= ((n - 1) * R) ** 2
        print(f"{n:2d}  {off:6.3f}  {c.quadrature:11.5f}  {c.closed_form:11.5f}  "
              f"{c.rel_error:8.1e}  {str(c.agrees):6s}  {sector_ok}")

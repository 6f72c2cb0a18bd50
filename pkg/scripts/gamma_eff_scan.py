"""Fitted single-atom decay rate against 4 omega0^2 / Gamma over a grid."""

import numpy as np

from rydghz.scheme1 import gamma_eff_oracle

print(f"{'omega0':>7} {'Gamma':>6} {'fitted':>10} {'closed':>10} {'ratio':>7}")
for gamma in (5.0, 6.0, 10.0, 20.0):
    for omega0 in np.round(np.linspace(0.1, 0.3, 3) * gamma / 2, 3):
        fitted, closed = gamma_eff_oracle(float(omega0), gamma)
        print(f"{omega0:7.3f} {gamma:6.1f} {fitted:10.5f} {closed:10.5f} {fitted / closed:7.4f}")

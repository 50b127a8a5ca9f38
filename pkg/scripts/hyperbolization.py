"""Hyperbolized NLS against NLS for a range of relaxation parameters."""

import sys

from fourier_relax.experiments import hyperbolization_study

taus = [float(a) for a in sys.argv[1:]] or [1e-3, 1e-5, 1e-7, 1e-9]
for r in hyperbolization_study(taus):
    print(f"tau={r.tau:.0e}  deviation {r.deviation:.2e}  error {r.error:.2e}  "
          f"drifts M {r.mass_drift:.1e} P {r.momentum_drift:.1e} E {r.energy_drift:.1e}")

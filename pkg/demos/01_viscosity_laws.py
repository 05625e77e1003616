"""Viscosity coefficient pairs: construction, admissibility, growth envelope.

Walks through the coefficient machinery:

* build power-law shear coefficients and evaluate the derived second
  coefficient g = rho h' - h and the entropy weights phi, psi;
* validate the admissibility conditions on a log-spaced density grid and
  read the per-condition report;
* bisect for the largest feasible nu;
* check the two-sided growth envelope implied by the combination condition.
"""

import numpy as np

from bdns import (
    AdmissibilityParams,
    ViscosityLaw,
    find_max_nu,
    growth_envelope,
    validate,
)

print("=" * 70)
print("1. The shallow-water pair: h = rho, g = 0")
print("=" * 70)
law = ViscosityLaw(terms=((1.0, 1.0),))
print("law:", law.describe())
for rho in (0.5, 1.0, 2.0):
    print(f"  rho={rho}: h={law.h(rho):.3f} g={law.g(rho):.3f} "
          f"phi={law.phi(rho):.4f} psi={law.psi(rho):.4f}")
params = AdmissibilityParams(nu=0.9, gamma=2.0, N=2)
report = validate(law, params)
print("validation (nu=0.9, gamma=2, N=2):", "PASS" if report.overall else "FAIL")
for rec in report.records:
    status = "pass" if rec.passed else "FAIL"
    extra = "" if rec.applicable else " (not applicable)"
    print(f"  {rec.condition}: {status}, worst margin {rec.margin:+.3e}{extra}")

print()
print("=" * 70)
print("2. A mixed pair h = rho + rho^3 needs a smaller nu; bisect for it")
print("=" * 70)
cubic = ViscosityLaw(terms=((1.0, 1.0), (1.0, 3.0)))
nu_star = find_max_nu(cubic, gamma=2.0, N=2)
print(f"largest feasible nu for {cubic.describe()}: {nu_star:.4f}")
print("validates:", validate(cubic, AdmissibilityParams(nu=nu_star, gamma=2.0, N=2)).overall)

print()
print("=" * 70)
print("3. Degenerate cases the validator must reject")
print("=" * 70)
const = ViscosityLaw(constant=1.0)
rep = validate(const, AdmissibilityParams(nu=0.5, gamma=2.0, N=2))
rec = rep.record("(10)")
print(f"constant pair: overall={'pass' if rep.overall else 'FAIL'}; "
      f"(10) margin {rec.margin:+.3e} ({rec.note})")
sub = ViscosityLaw(terms=((1.0, 2.0 / 3.0),))
rep = validate(sub, AdmissibilityParams(nu=0.1, gamma=2.0, N=3))
print(f"sub-linear h=rho^(2/3): overall={'pass' if rep.overall else 'FAIL'}; "
      f"(8) fails at rho={rep.record('(8)').worst_rho:g}")

print()
print("=" * 70)
print("4. Growth envelope, calibrated at rho = 1")
print("=" * 70)
rhos = np.logspace(-3, 3, 7)
lo, hi = growth_envelope(law, params, rhos)
h = law.h(rhos)
print(f"{'rho':>10} {'lower':>12} {'h(rho)':>12} {'upper':>12}  bracketed")
for r, l, v, u in zip(rhos, lo, h, hi):
    print(f"{r:10.3g} {l:12.4g} {v:12.4g} {u:12.4g}  {l <= v <= u}")

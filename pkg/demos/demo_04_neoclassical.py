#!/usr/bin/env python3
"""The fractional binomial inequality behind every product estimate:

    (1/p) sum_k x^(k/p)/(k/p)! * y^((n-k)/p)/((n-k)/p)!  <=  (x+y)^(n/p)/(n/p)!

with x! = Gamma(x+1).  Equality holds at p = 1 (the binomial theorem)."""

import numpy as np

from roughsig import frac_factorial, neoclassical_sides

print("fractional factorials:")
for x in (0.0, 0.5, 1.0, 2.5, 4.0):
    print(f"  {x}! = {frac_factorial(x):.10f}")

print()
print("p = 1 is the binomial theorem (lhs = rhs):")
lhs, rhs = neoclassical_sides(1.0, 2.0, 3.0, 4)
print(f"  x=2, y=3, n=4: lhs = {lhs:.12f}, rhs = 5^4/4! = {rhs:.12f}")

print()
print("sweep over p, with the worst slack across a geometric (x, y) grid:")
xs = np.geomspace(0.01, 10.0, 9)
print(f"{'p':>5} {'n':>3} {'min rhs-lhs':>14} {'min (rhs-lhs)/rhs':>18}")
for p in (1.1, 1.5, 2.0, 2.5, 3.7):
    for n in (1, 6, 12):
        worst_abs, worst_rel = np.inf, np.inf
        for x in xs:
            for y in xs:
                lhs, rhs = neoclassical_sides(p, float(x), float(y), n)
                worst_abs = min(worst_abs, rhs - lhs)
                worst_rel = min(worst_rel, (rhs - lhs) / rhs)
        print(f"{p:5.1f} {n:3d} {worst_abs:14.4e} {worst_rel:18.4e}")

print()
print("the slack shrinks as p -> 1 and vanishes there; for p > 1 the 1/p")
print("prefactor keeps the sum of cross terms below the binomial envelope.")

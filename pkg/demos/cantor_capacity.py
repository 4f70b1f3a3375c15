"""Capacity of the middle-thirds Cantor set seen through dyadic trees.

The set is discretized on the interval's dyadic tree at increasing depths
and its capacity computed with the weight ``π_s``; the ratios between
depths ``n`` and ``n+2`` settle into a narrow window.  The same set is
then treated as the whole of the Cantor space.
"""

from treecap import capacity, check_capacity_transfer, discretize_set, make_space, weight_pi_s

s, p = 0.75, 2.0
cantor = "ifs 1/3 0 1/3 2/3"

print(" depth  cells  capacity")
for n in range(2, 13, 2):
    space = make_space("interval", n)
    E = discretize_set(space, cantor, n)
    print(f"{n:6d}  {len(E):5d}  {capacity(weight_pi_s(space, s, p), E, p):.10f}")

for kind in ("interval", "cantor"):
    rep = check_capacity_transfer(make_space(kind, 1), cantor, s, p, range(4, 11))
    lo, hi = rep.empirical["window"]
    print(f"{kind:>8}: Cap_n/Cap_(n+2) in [{lo:.4f}, {hi:.4f}], log-slope {rep.empirical['log_slope']:+.4f}")

"""Continuous energies against tree energies, and the graph maximal inequality.

For Lebesgue measure on the interval the kernel energy is computed by
quadrature and compared with the discrete tree sum at several depths.
Then the three graph sums (linear, maximal, Wolff) are integrated for an
atom and their ratios printed.
"""

from fractions import Fraction

from treecap import SpaceMeasure, check_energy_equivalence, check_mww, continuous_energy, lebesgue, make_space

s, p = 0.5, 2.0
space = make_space("interval", 11)
for L in (8, 9, 10, 11):
    print(f"E_X(Lebesgue) at quadrature level {L:2d}: {continuous_energy(space, lebesgue(space), s, p, L):.6f}")

rep = check_energy_equivalence(space, lebesgue(space), s, p, range(4, 11))
for n, r in zip(rep.empirical["depths"], rep.empirical["ratios"]):
    print(f"depth {n:2d}: tree/continuous energy {r:.5f}")

atom = SpaceMeasure(atoms=(((Fraction(1, 3),), 1.0),))
for q in (1.5, 2.0, 3.0):
    rep = check_mww(make_space("interval", 10), atom, q, 10, s=s)
    print(f"q={q}: ∫I^q/∫S^q = {rep.empirical['ratio_I_S']:.4f}, ∫I^q/∫W = {rep.empirical['ratio_I_wolff']:.4f}")

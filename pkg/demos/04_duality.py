"""Dual potentials and the duality gap.

The dual problem maximizes the sum of two Choquet integrals over pairs of
potentials bounded by the cost.  On a small corpus the gap to the
supermodular primal optimum is measured; potentials built from the
optimal support are checked against the c-transform conditions.
"""

from capacity_ot import check_cm, potentials_from_monotone_set, solve_dual, solve_optimal, support
from capacity_ot.generate import default_corpus

print(f"{'instance':28s} {'primal':>10s} {'dual':>10s} {'gap':>10s}")
for name, inst in default_corpus(seed=0, repeats=1):
    if inst.shape[0] * inst.shape[1] > 6:
        continue
    primal = solve_optimal(inst)
    rep = solve_dual(inst, primal=primal.cost)
    print(f"{name:28s} {primal.cost:10.6f} {rep.dual_value:10.6f} {rep.gap:10.2e}")

name, inst = default_corpus(seed=0, repeats=1)[9]
S = support(solve_optimal(inst).plan)
pair = potentials_from_monotone_set(S, inst.cost)
cm = check_cm(pair, S, inst.cost)
print(f"\n{name}: support {S.points}")
print("phi =", pair.phi.round(4).tolist(), " psi =", pair.psi.round(4).tolist())
print(f"residuals: {cm.cm1:.1e} {cm.cm2:.1e} {cm.cm3:.1e}")

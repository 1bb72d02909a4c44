"""
The input scan: first incumbent, subspace bounds and the initial guarantee
===========================================================================

A single pass solves the structures with one, two and n coalitions, gathers
per-size max/avg/min and bounds every other subspace.
"""

from csgip import format_cs, generate, scan_and_search

t = generate(12, "normal", seed=3)
r = scan_and_search(t)

print("incumbent", format_cs(r.best_cs), round(r.best_value, 4))
print("UB*", round(r.ub_star, 4), "LB*", round(r.lb_star, 4), "beta", round(r.beta, 4))
print(len(r.subspaces), "subspaces bounded,", r.pruned, "pruned right away")

# the most promising subspaces
for sp in sorted(r.remaining, key=lambda sp: -sp.max_bound)[:5]:
    print(sp.G, "MAX", round(sp.max_bound, 3), "AVG", round(sp.avg_bound, 3), "|P_G|", sp.size)

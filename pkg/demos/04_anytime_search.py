"""
Anytime search with a quality guarantee
========================================

The solver keeps an incumbent and a bound beta such that the optimum is at
most beta times the incumbent.  Stopping early at an acceptable beta is
usually much faster than proving optimality.
"""

from csgip import SearchConfig, format_cs, generate, solve

t = generate(16, "ndcs", seed=4)

# a progress sink receives every snapshot as it happens
sol = solve(t, progress=lambda s: print(f"{s.elapsed * 1000:8.2f} ms  best {s.best_value:8.3f}  beta {s.beta:.4f}"))
print(sol.status, format_cs(sol.cs), round(sol.value, 4), sol.cs_examined, "structures evaluated")

# accept anything within 5% of optimal
quick = solve(t, SearchConfig(beta_star=1.05))
print(quick.status, round(quick.value, 4), "beta", round(quick.beta_final, 4),
      f"{quick.elapsed * 1000:.2f} ms vs {sol.elapsed * 1000:.2f} ms")

# restrict to exactly three coalitions of at most six agents
constrained = solve(t, SearchConfig(part_count=3, max_part=6))
print("constrained", format_cs(constrained.cs), round(constrained.value, 4))

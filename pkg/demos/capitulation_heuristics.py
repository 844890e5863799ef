"""
Simulating the filtration heuristics
====================================

Model CP-1 draws, at each filtration step, uniform classes and uniform
Hasse symbols, and records m, the largest batch e, and whether (m, e) is
smooth. Larger N should favour capitulation; the class draws do not depend
on N, so the trend is exact trial by trial.
"""

from capnorm.heuristics import SimulationConfig, merge_reports, prob_m_at_most, simulate

for N in range(1, 5):
    rep = simulate(SimulationConfig(p=2, N=N, r=2, hK_valuation=2, trials=50_000, seed=1))
    f = rep.capitulation_frequency
    print(f"N={N}: capitulation {f:.4f} +- {rep.radius(f):.4f}")

# the law of m against its closed form
rep = simulate(SimulationConfig(p=3, N=2, r=3, hK_valuation=2, trials=50_000, seed=7))
seen = 0
for i, count in enumerate(rep.m_counts[:5]):
    seen += count
    print(f"P(m <= {i}) = {seen / rep.trials:.4f}  (model {prob_m_at_most(2, 3, i):.4f})")

# runs split at any offsets merge back to the single run
halves = [simulate(SimulationConfig(p=3, N=2, r=3, hK_valuation=2, trials=n, seed=7, offset=o))
          for o, n in ((0, 12_345), (12_345, 37_655))]
print("merge equals single run:", merge_reports(*halves) == rep)
print()
print(rep.text())

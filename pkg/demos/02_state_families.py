"""Sample every random state family and show its oracle signature.

Two-qubit families report one negativity (first qubit vs second);
three-qubit families report the qubit-vs-rest triple, which is what
separates the separable / bipartite / GHZ / W classes operationally.
"""

import numpy as np

from entdetect.qlinalg import negativity, negativity_per_qubit
from entdetect.stategen import (
    gen_be_3q,
    gen_bell_random_2q,
    gen_binned_pure_2q,
    gen_epsilon_2q,
    gen_ghz_3q,
    gen_sep_3q,
    gen_sep_mixed_2q,
    gen_sep_pure_2q,
    gen_w_3q,
    gen_werner,
    sample_rng,
)

rng = sample_rng(2024, 0)

print("--- two qubits ---")
print("sep pure:     N =", round(negativity(gen_sep_pure_2q(rng).to_density()), 6))
print("sep mixed L=4: N =", round(negativity(gen_sep_mixed_2q(rng, 4)), 6))
print("random Bell:  N =", round(negativity(gen_bell_random_2q(rng).to_density()), 6))
psi, n = gen_binned_pure_2q(rng, 0.2, 0.3)
print(f"binned (0.2,0.3): N = {n:.6f}")
for eps in (0.0, 0.3, 1.0):
    st = gen_epsilon_2q(rng, eps, "mixed")
    print(f"epsilon-mixed eps={eps:.1f}: N = {negativity(st):.6f}")
print("werner p=0.2: N =", round(negativity(gen_werner(rng, 0.2)), 6), "(= 1/2 - p)")

print()
print("--- three qubits (N per qubit-vs-rest bipartition) ---")
for name, gen in (
    ("separable", gen_sep_3q),
    ("bipartite ", gen_be_3q),
    ("GHZ class ", gen_ghz_3q),
    ("W class   ", gen_w_3q),
):
    triple = negativity_per_qubit(gen(rng).to_density(), 3)
    print(f"{name}: {np.round(triple, 4)}")
print()
print("bipartite states carry one zero (the separated qubit); GHZ and W")
print("are entangled across every cut, which is what the 4-way classifier learns.")

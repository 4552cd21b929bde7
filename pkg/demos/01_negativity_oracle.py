"""Walk through the exact entanglement oracle on canonical states.

The oracle machinery: partial transposition of one qubit, the trace
norm of the result, and the negativity (||rho^T1|| - 1)/2.  For two
qubits the PPT criterion is exact: negativity zero means separable.
"""

import numpy as np

from entdetect.qlinalg import (
    DensityMatrix,
    PureState,
    negativity,
    numerical_rank,
    partial_transpose,
    purity,
    trace_norm,
)

print("=== product state |01> ===")
psi = PureState(np.array([0, 1, 0, 0], dtype=complex), 2)
rho = psi.to_density()
print("negativity:", negativity(rho), "(separable -> 0)")
print("purity:    ", purity(rho))

print()
print("=== Bell state (|00> + |11>)/sqrt(2) ===")
bell = PureState(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2), 2)
rho = bell.to_density()
pt = partial_transpose(rho, 0)
print("PT eigenvalue signature makes entanglement visible:")
print(np.round(np.linalg.eigvalsh(pt), 6))
print("trace norm of PT:", trace_norm(pt), "-> negativity", negativity(rho))

print()
print("=== Werner family rho_W(p): entangled iff p < 1/2 ===")
psi_minus = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
proj = np.outer(psi_minus, psi_minus.conj())
for p in (0.0, 0.25, 0.5, 0.75, 1.0):
    rho = DensityMatrix((p / 3) * np.eye(4) + (1 - 4 * p / 3) * proj, 2)
    print(
        f"p={p:4.2f}  negativity={negativity(rho):.4f}"
        f"  purity={purity(rho):.4f}  rank={numerical_rank(rho, 1e-10)}"
    )
print("the label flips exactly at p = 1/2, matching max(0, 1/2 - p)")

"""The two controlled splitters act as a controlled SWAP of B and C.

Local splitters on A undo the routing through A. After that, the output
matches (|+> chi - |-> SWAP chi)/sqrt(2) for any input chi on B and C,
entangled inputs included.
"""
import numpy as np

from fockswap import ModeLayout, PureState, controlled_swap_equivalence

layout = ModeLayout.uniform(8)
rng = np.random.default_rng(0)

worst = 1.0
for trial in range(20):
    chi = np.zeros((8, 8), dtype=complex)
    chi[:4, :4] = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    t = np.zeros(layout.shape, dtype=complex)
    t[0, 0] = chi / np.linalg.norm(chi)
    worst = min(worst, controlled_swap_equivalence(PureState.from_tensor(layout, t)))

print(f"lowest fidelity with the controlled-SWAP form over 20 random inputs: {worst:.15f}")

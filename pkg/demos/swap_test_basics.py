"""SWAP test on Fock, coherent and cat inputs.

The ancilla's ground-state probability P_g carries the overlap of the two
motional states on B and C, overlap = |1 - 2 P_g|.
"""
import numpy as np

from fockswap import ModeLayout, PrepRecipe, prepare_pair, swap_test
from fockswap.oracles import cat_overlap, coherent_overlap

# Fock states are orthogonal unless they match
layout = ModeLayout((12, 12, 12))
print("Fock overlaps, rows m on B, columns n on C")
for m in range(4):
    row = []
    for n in range(4):
        state = prepare_pair(PrepRecipe("fock", {"m": m}), PrepRecipe("fock", {"m": n}), layout)
        row.append(swap_test(state).overlap_from_pg)
    print("  " + "  ".join(f"{v:5.3f}" for v in row))

# coherent states: the overlap is a Gaussian in the distance between amplitudes
layout = ModeLayout((32, 32, 32))
b = PrepRecipe("coherent", {"alpha_sq": 3.0, "phase": np.pi})
print("\ncoherent |alpha|^2 = 3 at phase pi against |beta|^2 = 3, phase phi_C")
for phi in np.linspace(0, 2 * np.pi, 9):
    res = swap_test(prepare_pair(b, b.with_params(phase=phi), layout))
    closed = coherent_overlap(np.sqrt(3) * np.exp(1j * np.pi), np.sqrt(3) * np.exp(1j * phi))
    print(f"  phi_C = {phi:5.3f}  simulated {res.overlap_from_pg:.6f}  closed form {closed:.6f}")

# a finite number of shots gives a noisy estimate
layout = ModeLayout((20, 20, 20))
even = PrepRecipe("cat", {"alpha_sq": 1.0, "phi_cat": 0.0})
state = prepare_pair(even, even.with_params(phi_cat=np.pi / 2), layout)
res = swap_test(state, shots=500, rng_seed=3)
print(f"\ncat states, phi_cat = pi/2: exact P_g {res.p_g_exact:.4f}, "
      f"500 shots give {res.p_g_sampled:.3f} +/- {res.stderr:.3f}")
print(f"overlap {res.overlap_from_pg:.4f}, closed form {cat_overlap(1.0, np.pi / 2):.4f}")

"""Purity of mixed motional states from two copies.

Optical pumping traces the ancilla out of an entangled ancilla-motion
state, which leaves the mode in a mixture. Running the SWAP test on two
copies then measures Tr(rho^2).
"""
import numpy as np

from fockswap import ContrastModel, ModeLayout, PrepRecipe, purity_experiment
from fockswap.oracles import purity_rho1, purity_rho2_exact

layout = ModeLayout.uniform(4)
contrast = ContrastModel(fock=(0.92, 0.88))
print("rho1 = cos^2(phi1/2)|0><0| + sin^2(phi1/2)|1><1|")
for phi1 in np.linspace(0, np.pi, 5):
    ideal = purity_experiment(PrepRecipe("mixed-rho1", {"phi1": phi1}), layout).overlap_from_pg
    scaled = purity_experiment(PrepRecipe("mixed-rho1", {"phi1": phi1}), layout, contrast=contrast).overlap_from_pg
    print(f"  phi1 = {phi1:5.3f}  ideal {ideal:.4f}  with contrast {scaled:.4f} "
          f"(model {purity_rho1(phi1, 0.92, 0.88):.4f})")

# |alpha> and |-alpha> are not quite orthogonal, so rho2 is a bit purer than 1/2
layout = ModeLayout.uniform(22)
print("\nrho2 mixing |alpha> and |-alpha>, |alpha|^2 = 1.2")
for phi2 in (-np.pi / 2, -np.pi / 4, 0.0, np.pi / 4, np.pi / 2):
    res = purity_experiment(PrepRecipe("mixed-rho2", {"phi2": phi2, "alpha_sq": 1.2}), layout)
    print(f"  phi2 = {phi2:+.3f}  simulated {res.overlap_from_pg:.6f}  exact {purity_rho2_exact(phi2, 1.2):.6f}")

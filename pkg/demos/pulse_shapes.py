"""A ramped pulse of the right area gives the same gate as the ideal one.

Integrating the time-dependent coupling of a sin^2-ramped envelope gives
a unitary that depends only on the pulse area.
"""
import numpy as np

from fockswap import PulseEnvelope, controlled_beam_splitter, evolve_pulsed_cbs

omega0 = 2 * np.pi * 680
ideal = controlled_beam_splitter(np.pi / 2, 0.0, ("A", "B"), (6, 6)).dense()

for tau in (0.0, 25e-6, 50e-6, 100e-6):
    env = PulseEnvelope.for_area(np.pi / 2, omega0, ramp_tau=tau)
    gate = evolve_pulsed_cbs(env, 0.0, ("A", "B"), (6, 6), steps=2000).dense()
    print(f"ramp {tau * 1e6:5.1f} us, length {env.total_T * 1e6:6.1f} us: "
          f"max |U_pulse - U_ideal| = {np.abs(gate - ideal).max():.1e}")

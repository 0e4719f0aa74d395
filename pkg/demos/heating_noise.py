"""Motional heating during the SWAP test.

A heating jump on C turns |1> into |0> or |2>, which is orthogonal to the
|1> on B. So the overlap of identical Fock states falls by about the jump
probability. The first pi splitter moves C's content into A, so heating
on C only matters before that gate.
"""
from fockswap import ModeLayout, NoiseConfig, PrepRecipe, prepare_pair, swap_test

fock1 = PrepRecipe("fock", {"m": 1})
state = prepare_pair(fock1, fock1, ModeLayout.uniform(4))
rate = 20.2  # quanta/s on C

for label, durations in [
    ("1.1 ms exposure before the test", {"prep": 1.1e-3, "cbs_ac": 0.0, "cbs_ab": 0.0}),
    ("heating during the two gates", {"prep": 0.0, "cbs_ac": 736e-6, "cbs_ab": 368e-6}),
]:
    noise = NoiseConfig((0.0, 0.0, rate), gate_durations=durations, trajectories=10_000)
    res = swap_test(state, noise=noise, rng_seed=1)
    exposed = durations["prep"] + durations["cbs_ac"]
    print(f"{label}: overlap drop {1 - res.overlap_from_pg:.4f}, first order {rate * exposed:.4f}")

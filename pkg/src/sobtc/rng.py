"""Counter-based randomness for reproducible lattice runs.

Every random draw in a run is a pure function of (seed, step index, slot):
each (step, slot) pair opens an independent Philox stream, and draws inside
a stream are vectorized over sites in a fixed order.  Checkpoints therefore
only need to store the seed and the step index; no generator state blobs.
"""

from __future__ import annotations

import numpy as np

# draw slots within one time step
SLOT_DORNIC = 0   # Poisson + Gamma draws of the stochastic activation kernel
SLOT_N_NOISE = 1  # Gaussian noise of the total-density update


class CounterRng:
    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    def stream(self, step_index: int, slot: int) -> np.random.Generator:
        """Fresh generator for (seed, step, slot); identical inputs give
        identical streams on every platform and thread layout."""
        return np.random.Generator(
            np.random.Philox(key=self.seed, counter=[0, 0, slot, step_index]))

"""Random CSI attack: a fresh uniform draw in the adversary box every slot."""

import numpy as np

from mdp.observation import csi_dims
from .threat import ThreatModel


def noise_attack(threat: ThreatModel, slot_seed: int) -> np.ndarray:
    """Raw adversary blocks with CSI dims drawn uniformly.

    gamma and R entries are mean placeholders; the harness injects only the
    CSI, so the observation carries truthful gamma and R.
    """
    mean, std = threat.normalizer.mean, threat.normalizer.std
    adv_dims = threat.adversary_dims
    blocks = mean[adv_dims].copy()
    position = {d: i for i, d in enumerate(adv_dims)}
    dims = csi_dims(threat.adversaries, threat.num_antennas)
    idx = [position[d] for d in dims]
    rng = np.random.default_rng(slot_seed)
    radius = threat.delta_adv * std[dims]
    blocks[idx] = rng.uniform(mean[dims] - radius, mean[dims] + radius)
    return blocks

"""
Saturation flow of the cellular automaton
=========================================

A saturated approach under permanent green discharges at about 1700
vehicles per hour with V_max = 2 and slow-down probability 0.15. Without
random slow-downs the automaton is noticeably faster.
"""

import numpy as np

from vsnsim.world import saturation_flow_probe

for p in (0.15, 0.0):
    flows = [saturation_flow_probe(duration=3600, p=p, seed=s) for s in range(5)]
    print(f"p={p:.2f}: {np.mean(flows):.0f} veh/h  (seeds: {', '.join(f'{f:.0f}' for f in flows)})")

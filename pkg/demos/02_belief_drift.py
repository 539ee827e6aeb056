"""
How a lane model drifts without data
====================================

One approach is simulated twice: the ground truth with random slow-downs,
and the controller's fuzzy belief that only hears the entry hello. The
belief support widens by half a cell of uncertainty per step and collapses
the moment a position is measured.
"""

from vsnsim.belief import model_update, position_uncertainty
from vsnsim.collection import CollectionPolicy
from vsnsim.experiment import ScenarioConfig, Simulation

cfg = ScenarioConfig(topology="single_intersection", duration=60, warmup=0, saturation=0.0)
sim = Simulation(cfg, seed=1, policy=CollectionPolicy(1, float("inf")))
node = sim.nodes[0]
lane = node.lanes[0]

# put one vehicle on the western approach and announce it
veh = sim.world.generate_arrivals([1.0, 0.0])[0]
sim.vsn.register(veh, sim.world.t)

# each step first brings the belief up to the current second, then lets the
# world move on, so the belief is compared with the truth before the move
for t in range(12):
    truth = veh.cell
    sim.step()
    fv = lane.vehicles[0]
    print(f"t={t:2d} truth={truth:2d} belief={tuple(fv.X)} unc={position_uncertainty(fv)}")

# one query makes the belief crisp again
resp = sim.vsn.query_positions(node.index, [veh.id], sim.world.t)[0]
model_update(lane, True, {resp.vehicle: (resp.link, resp.cell, resp.velocity)}, advance=False)
print("after query:", tuple(lane.vehicles[0].X), "truth", veh.cell)

"""The costly-observation game across the five benchmark scenarios.

When checking the queue costs money, arriving drivers mix between three
moves: pay to observe (then join only a short queue), join blind, or
take the outside option.  The equilibrium of that game and the strategy
a welfare-maximizing planner would impose can sit far apart -- the gap
is the price of anarchy for a city curb.
"""

from parkqueue import (
    CostParams,
    GameSpec,
    QueueParams,
    nash_equilibrium,
    socially_optimal_strategy,
)

MU = 1 / 120
SCENARIOS = {
    "row1": (0.2, CostParams(75, 0.8, 0.05, 0.25), "zero"),
    "row2": (1 / 4.85, CostParams(75, 0.75, 0.05, 0.5), "zero"),
    "row3": (1 / 4.5, CostParams(75, 0.5, 0.075, 2.0), "zero"),
    "row4": (1 / 4.5, CostParams(65, 1.5, 0.05, 3.85, 0.962), "offstreet"),
    "row5": (1 / 4.75, CostParams(65, 1.5, 0.05, 3.85, 0.962), "offstreet"),
}


def show(label, result):
    s = result.strategy
    print(
        f"  {label}: observe={s.p_observe:5.3f} balk={s.p_balk:5.3f} "
        f"join={s.p_join:5.3f}  welfare {result.welfare:8.3f}"
        f"{'' if result.converged else '  (not converged)'}"
    )


for name, (lam, costs, option) in SCENARIOS.items():
    spec = GameSpec(QueueParams(lam, MU, 30, 100), costs, option)
    print(f"{name}: demand {lam:.4f}/min, inspect {costs.observe_cost}, "
          f"outside option {option} (informed cutoff {spec.balk_threshold})")
    selfish = nash_equilibrium(spec)
    planner = socially_optimal_strategy(spec, resolution=120)
    show("selfish ", selfish)
    show("planner ", planner)
    print(f"  welfare lost to selfish play: {planner.welfare - selfish.welfare:.3f}\n")

print("Note the garage scenarios (rows 4-5): every diverted driver pays more")
print("for the garage than the trip is worth, so even the planner's welfare")
print("is negative -- the planner merely picks the least bad mix.")

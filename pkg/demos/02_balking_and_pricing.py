"""Selfish balking, the social welfare curve, and fee design.

Drivers who can see the queue join exactly while the trip still pays;
that selfish cutoff overfills the curb relative to what a planner would
choose.  The welfare curve over joining thresholds is single-peaked, so
a per-minute fee interval can move the selfish cutoff onto the planner's
peak -- congestion pricing in one line of arithmetic.
"""

from parkqueue import (
    CostParams,
    QueueParams,
    balking_level,
    pricing_interval,
    social_welfare_curve,
    socially_optimal_level,
    welfare_ordering_check,
)

queue = QueueParams(arrival_rate=0.2, service_rate=1 / 120, spots=30, capacity=100)
costs = CostParams(reward=75.0, wait_cost=1.5, park_cost=0.05, observe_cost=0.25)

n_b = balking_level(queue, costs)
n_so = socially_optimal_level(queue, costs)
curve = social_welfare_curve(queue, costs)

print(f"selfish cutoff n_b = {n_b}, planner's peak n_so = {n_so}\n")
print("welfare rate by joining threshold:")
for level, value in enumerate(curve):
    marks = []
    if level == n_so:
        marks.append("<- optimum")
    if level == n_b:
        marks.append("<- selfish cutoff")
    bar = "#" * max(0, int(round(value * 25)))
    print(f"  {level:3d} {value:8.4f} {bar} {' '.join(marks)}")

report = welfare_ordering_check(queue, costs, capped_level=4)
print(f"\nwelfare at the selfish cutoff: {report.balk_welfare:.4f}")
print(f"welfare at the optimum:        {report.optimal_welfare:.4f}")
print(f"welfare under a cap of 4:      {report.capped_welfare:.4f}")
print(f"ordering consistent:           {report.consistent}")

interval = pricing_interval(queue, costs, n_so)
print(f"\nfees inducing the optimum: ({interval.lower:.3f}, {interval.upper:.3f}] per minute")
fee = interval.midpoint()
repriced = CostParams(reward=75.0, wait_cost=1.5, park_cost=fee, observe_cost=0.25)
print(f"charge {fee:.3f}/min and the selfish cutoff moves to {balking_level(queue, repriced)}")

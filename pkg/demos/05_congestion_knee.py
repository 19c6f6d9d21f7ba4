"""Where the wait-time curve breaks: balanced versus funneled demand.

Sweep total demand through saturation on the same three-face triangle
twice.  With arrivals injected at all three faces, waits stay flat until
the whole system is nearly full.  Funnel the same demand into two faces
and their queues blow up while the third face still has empty spots --
the knee of the wait curve lands at a much lower system utilization.
That gap is why "the city is 65% full" can coexist with gridlock on the
block you actually want.
"""

from parkqueue import (
    Blockface,
    NetworkScenario,
    Strategy,
    Street,
    complete_topology,
    congestion_knee,
    occupancy_congestion_sweep,
)

faces, streets = complete_topology((10, 10, 10))


def sweep(sources, lambda_range, steps, capacity):
    scenario = NetworkScenario(
        blockfaces=faces, streets=streets, sources=sources,
        arrival_rate=1.0, service_rate=1 / 30,
        strategy=Strategy(0.0, 0.0, 1.0), balk_threshold=60,
        capacity=capacity, patient_drivers=True,
    )
    return occupancy_congestion_sweep(
        scenario, lambda_range, steps=steps, seeds=4, horizon=8000.0, warmup=800.0
    )


for label, sources, rng, steps, cap in (
    ("three-source", ("b0", "b1", "b2"), (0.75, 1.3), 12, 60),
    ("two-source", ("b0", "b1"), (0.6, 1.3), 15, 150),
):
    rows = sweep(sources, rng, steps, cap)
    print(f"{label} injection:")
    print("  demand   utilization   mean wait")
    for r in rows:
        print(f"  {r.arrival_rate:6.3f}   {r.mean_utilization:10.1%}   {r.mean_avg_wait:8.2f}")
    knee = congestion_knee(rows)
    print(f"  knee (wait first exceeds 5x baseline): {knee:.1%}\n" if knee else "  no knee\n")

"""Anatomy of one parking queue.

A 30-spot blockface with a two-hour mean stay, fed by one driver every
five minutes, is a multi-server queue with finite room.  This script
walks through its stationary occupancy law, what happens when the room
runs out, and how long a driver arriving at a given state will wait.
"""

import numpy as np

from parkqueue import QueueParams, queue_time_density, stationary_plain

queue = QueueParams(arrival_rate=0.2, service_rate=1 / 120, spots=30, capacity=100)
print(f"offered load: {queue.traffic_intensity:.2f} of capacity")

dist = stationary_plain(queue)
print("\noccupancy distribution (every 5th state):")
for k in range(0, 55, 5):
    bar = "#" * int(round(dist.probs[k] * 400))
    print(f"  {k:3d} {dist.probs[k]:8.5f} {bar}")

busy = np.arange(queue.spots, queue.capacity + 1)
print(f"\nmean occupancy:        {dist.mean_occupancy(queue.spots):6.1%}")
print(f"P(all spots taken):    {dist.probs[queue.spots:].sum():6.4f}")
print(f"mean drivers waiting:  {float((busy - queue.spots) @ dist.probs[queue.spots:]):6.3f}")

print("\nwaiting time seen at arrival (state k -> mean wait in minutes):")
for k in (30, 33, 36, 40):
    # The k-th waiter needs k - spots + 1 departures; each takes an
    # exponential time with the whole curb serving.
    grid = np.linspace(1e-9, 200, 20_001)
    density = queue_time_density(queue, k, grid)
    mean = float(np.trapezoid(grid * density, grid))
    print(f"  k={k}: {mean:6.1f} (exact {(k - queue.spots + 1) / (queue.spots * queue.service_rate):5.1f})")

print("\nSqueeze the same demand into a loss system (room == spots) and the")
print("distribution truncates instead of spilling into a waiting line:")
loss = stationary_plain(QueueParams(0.2, 1 / 120, 30, 30))
print(f"  occupancy {loss.mean_occupancy(30):.1%}, P(full) {loss.probs[30]:.4f}")

"""Badly scaled objectives: equal weights do not mean an equal compromise."""
import numpy as np

from tvmoprox import grid_pareto_front, load_scenario, solve_scalarized

spec = load_scenario("illscaled")
objs = spec.build_stream().at(1)  # 1000 x^2 and 0.001 (x - 2)^2

front = grid_pareto_front(objs, (-1.0, 3.0), 401)
print(f"grid front spans x in [{front.points.min():.2f}, {front.points.max():.2f}] "
      f"with {len(front.points)} points")

for w1 in (0.5, 1e-3, 1e-6, 1e-7):
    x = solve_scalarized(objs, [w1, 1 - w1])
    print(f"omega_1={w1:g}: x={x[0]:.6f}  phi=({objs[0].value(x):.4g}, {objs[1].value(x):.4g})")

# rescaling by the curvature recovers a balanced compromise
L = np.array([o.lipschitz for o in objs])
x = solve_scalarized(objs, (1 / L) / (1 / L).sum())
print(f"curvature-normalized weights: x={x[0]:.6f}")

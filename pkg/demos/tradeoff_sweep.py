"""How the weights trade one objective against the other at the engine's fixed point."""
import numpy as np

from tvmoprox import load_scenario, run_online, solve_scalarized

for a in np.round(np.arange(1, 10) / 10, 1):
    spec = load_scenario("stationary2", [f"alphas={a},{1 - a:.1f}"])
    stream = spec.build_stream()
    x = run_online(stream, spec.x1, spec.config()).outer[-1]
    objs = stream.at(spec.T)
    # the engine's fixed point balances alpha_i * step_i, not alpha_i alone
    w = spec.alphas * spec.steps()
    xs = solve_scalarized(objs, w / w.sum())
    print(f"alpha_1={a:.1f}  phi_1={objs[0].value(x):.6f}  phi_2={objs[1].value(x):.6f}  "
          f"|x - scalarized(alpha*step)|={np.linalg.norm(x - xs):.1e}")

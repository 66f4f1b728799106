"""Prox operators of the builtin nonsmooth terms and one prox-gradient step."""
import numpy as np

from tvmoprox import Box, CompositeObjective, L1Norm, Quadratic, Zero

v = np.array([-2.0, -0.3, 0.0, 0.4, 3.0])

# soft thresholding shrinks toward zero by c * lam
print("l1 prox, c=0.5, lam=1:", L1Norm(1.0).prox(v, 0.5))
# the box prox is a clip, independent of c
print("box prox on [-1, 1]:   ", Box(-1.0, 1.0).prox(v, 0.5))
print("zero prox:             ", Zero().prox(v, 0.5))

# f(x) = 0.5 x'Ax + b'x with an l1 penalty
A = np.array([[2.0, 0.5], [0.5, 1.0]])
phi = CompositeObjective(Quadratic(A, [-1.0, 0.5]), L1Norm(0.2))
c = 1.0 / phi.lipschitz
x = np.array([3.0, -2.0])
for k in range(6):
    x_next, G = phi.prox_grad(x, c)
    dist, _ = phi.subdiff_distance(x_next)
    print(f"step {k}: x={x_next}, phi={phi.value(x_next):.6f}, |G|={np.linalg.norm(G):.2e}, "
          f"dist(0, subdiff)={dist:.2e}")
    x = x_next

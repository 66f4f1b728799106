"""
Independent replay of the bundled drift2 scenario.

Does not import tvmoprox. The per-step optima come from cvxpy, the online
iterates from a direct loop over soft-thresholded gradient steps. Run it to
regenerate the frozen values in test_replay.py:

    python tests/replay_drift2.py
"""

import json

import cvxpy as cp
import numpy as np

T, K, lam = 50, 10, 0.1
alphas = np.array([0.3, 0.7])
A = [np.array([[2.0, 0.5], [0.5, 1.0]]), np.array([[1.5, 0.0], [0.0, 3.0]])]
b = [np.array([-1.0, 0.0]), np.array([1.0, -1.0])]

rng = np.random.default_rng(7)
u = rng.standard_normal((2, 2))
u /= np.linalg.norm(u, axis=1, keepdims=True)


def center_shift(i, t):
    s = 0.02 * (t - 1) if i == 0 else 0.5 * np.sin(2 * np.pi * (t - 1) / 20)
    return s * u[i]


def f(i, t, x):
    z = x - center_shift(i, t)
    return 0.5 * z @ A[i] @ z + b[i] @ z


def grad(i, t, x):
    return A[i] @ (x - center_shift(i, t)) + b[i]


def phi(i, t, x):
    return f(i, t, x) + lam * np.abs(x).sum()


def soft(v, c):
    return np.sign(v) * np.maximum(np.abs(v) - c, 0.0)


def cvx_argmin(terms):
    x = cp.Variable(2)
    obj = 0
    for i, t in terms:
        d = center_shift(i, t)
        obj = obj + 0.5 * cp.quad_form(x - d, A[i]) + b[i] @ (x - d) + lam * cp.norm1(x)
    cp.Problem(cp.Minimize(obj)).solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12,
                                       tol_feas=1e-12)
    return np.array(x.value)


def subdiff_dist(i, t, x):
    g = grad(i, t, x)
    d = [abs(g[j] + lam * np.sign(x[j])) if x[j] != 0 else max(abs(g[j]) - lam, 0.0) for j in range(2)]
    return float(np.hypot(*d))


def replay():
    C = [1.0 / np.linalg.eigvalsh(a).max() for a in A]
    xs = [np.zeros(2)]
    for t in range(1, T + 1):
        x = xs[-1]
        for _ in range(K + 1):
            x = alphas[0] * soft(x - C[0] * grad(0, t, x), C[0] * lam) + \
                alphas[1] * soft(x - C[1] * grad(1, t, x), C[1] * lam)
        xs.append(x)
    opt = [[cvx_argmin([(i, t)]) for i in range(2)] for t in range(1, T + 1)]
    reg = [sum(phi(i, t, xs[t - 1]) - phi(i, t, opt[t - 1][i]) for t in range(1, T + 1)) for i in range(2)]
    stat = []
    for i in range(2):
        xs_i = cvx_argmin([(i, t) for t in range(1, T + 1)])
        stat.append(sum(phi(i, t, xs[t - 1]) - phi(i, t, xs_i) for t in range(1, T + 1)))
    v_T = sum(np.linalg.norm(xs[t] - xs[t - 1]) for t in range(1, T + 1))
    w_T = sum(max(np.linalg.norm(opt[t][i] - opt[t - 1][i]) for i in range(2)) for t in range(1, T))
    sigma_T = sum(subdiff_dist(i, t, xs[t - 1]) for t in range(1, T + 1) for i in range(2))
    e = max(max(abs(f(i, t, xs[t]) - f(i, t, xs[t - 1])),
                lam * abs(np.abs(xs[t]).sum() - np.abs(xs[t - 1]).sum()))
            for t in range(1, T + 1) for i in range(2))
    return {"dynamic_regret": reg, "static_regret": stat, "v_T": v_T, "w_T": w_T, "sigma_T": sigma_T,
            "e": e, "x_final": xs[-1].tolist()}


if __name__ == "__main__":
    print(json.dumps(replay(), indent=2))

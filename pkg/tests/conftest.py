import numpy as np


def central_difference(loss_fn, params, h=1e-6):
    """Central finite-difference gradient of a scalar loss over a parameter list."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + h
            up = loss_fn()
            flat_p[i] = orig - h
            down = loss_fn()
            flat_p[i] = orig
            flat_g[i] = (up - down) / (2.0 * h)
        grads.append(g)
    return grads


def max_relative_error(analytic, numeric, floor=1e-3):
    """Worst elementwise |a - n| / max(|a|, |n|, floor) across parameter lists."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def min_abs_preactivation(mlp, x):
    """Smallest |pre-activation| over all ReLU layers; guards finite differences
    against kink crossings."""
    h = x
    smallest = np.inf
    k = mlp.n_layers
    for layer in range(k):
        w, b = mlp.params[2 * layer], mlp.params[2 * layer + 1]
        z = h @ w.T + b
        if layer < k - 1 or mlp.relu_out:
            smallest = min(smallest, float(np.min(np.abs(z))))
            h = np.maximum(z, 0.0)
        else:
            h = z
    return smallest

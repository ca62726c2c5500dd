"""Central-difference verification of analytic gradients.

Checks run the computation in float64 (the caller casts parameters first,
e.g. via Module.astype) so the finite-difference noise floor sits far below
the tolerances being asserted; forward/training paths stay float32.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def grad_check(fn, params, eps: float = 1e-4, max_coords: int | None = None,
               rng: np.random.Generator | None = None) -> float:
    """Max relative error between analytic and numeric gradients.

    fn() must rebuild the forward pass and return a scalar Tensor. params
    are the tensors to perturb. When max_coords is given, at most that many
    coordinates per tensor are probed (chosen by rng); otherwise every
    coordinate is swept.
    """
    if not (1e-5 <= eps <= 1e-3):
        raise ValueError(f"eps must lie in [1e-5, 1e-3], got {eps}")
    params = list(params)
    for p in params:
        p.zero_grad()
    loss = fn()
    loss.backward()
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, ana in zip(params, analytic):
        flat = p.data.reshape(-1)
        n = flat.size
        if max_coords is not None and n > max_coords:
            if rng is None:
                rng = np.random.default_rng(0)
            coords = rng.choice(n, size=max_coords, replace=False)
        else:
            coords = range(n)
        ana_flat = ana.reshape(-1)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = fn().item()
            flat[i] = orig - eps
            f_minus = fn().item()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            denom = max(abs(float(ana_flat[i])), abs(numeric), 1e-8)
            rel = abs(float(ana_flat[i]) - numeric) / denom
            worst = max(worst, rel)
    return worst

"""Finite-difference oracles for model derivatives (fourth-order central stencils)."""
import numpy as np


def d1(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def d2(f, x, h):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def rel_err(a, ref, atol=1e-8):
    """Largest elementwise error scaled by ``max(|ref|, atol / 1e-5)``.

    A value <= 1e-5 means relative error <= 1e-5, or absolute error <= atol
    where the reference is close to zero.
    """
    a, ref = np.asarray(a, dtype=float), np.asarray(ref, dtype=float)
    scale = np.maximum(np.abs(ref), atol / 1e-5)
    return float((np.abs(a - ref) / scale).max())


def derivative_errors(model, x, h_x=1e-3, h_p=1e-6):
    """Errors of grad_x, diag_hess_x and all parameter Jacobians at one point."""
    x = np.asarray(x, dtype=float)
    m = model.m
    bundle = model.eval_bundle(x)
    eye = np.eye(m)
    fd_grad = np.array([d1(lambda s: model.eval(x + s * eye[j]), 0.0, h_x) for j in range(m)])
    fd_hess = np.array([d2(lambda s: model.eval(x + s * eye[j]), 0.0, h_x) for j in range(m)])

    theta = model.params.copy()
    probe = model.copy()

    def quantities(th):
        probe.params = th
        v, g, hh = probe.derivatives(x[None])
        return np.concatenate([v, g[0], hh[0]])

    cols = []
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = 1.0
        cols.append(d1(lambda s: quantities(theta + s * e), 0.0, h_p))
    J = np.array(cols).T  # (1 + 2m, p)
    pg = bundle.param_grads
    analytic = np.vstack([pg["value"][None], pg["grad_x"], pg["diag_hess_x"]])
    return {
        "grad_x": rel_err(bundle.grad_x, fd_grad),
        "diag_hess_x": rel_err(bundle.diag_hess_x, fd_hess),
        "param_grads": rel_err(analytic, J),
    }

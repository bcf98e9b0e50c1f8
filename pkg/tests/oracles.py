"""Independent reference solvers used by the tests."""

import numpy as np


def project_simplex_budget(w, budget):
    """Euclidean projection of a real vector onto {x >= 0, sum(x) <= budget}."""
    x = np.clip(w, 0.0, None)
    if x.sum() <= budget:
        return x
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - budget
    k = np.nonzero(u - css / np.arange(1, w.size + 1) > 0)[0][-1]
    tau = css[k] / (k + 1)
    return np.clip(w - tau, 0.0, None)


def project_feasible(X, P0):
    """Frobenius projection onto {X >= 0, tr(X) <= P0}."""
    X = 0.5 * (X + X.conj().T)
    w, V = np.linalg.eigh(X)
    w = project_simplex_budget(w, P0)
    return (V * w) @ V.conj().T


def linearized_objective(H_B, Phi, X):
    A = np.eye(H_B.shape[0]) + H_B @ X @ H_B.conj().T
    return np.linalg.slogdet(A)[1] - np.trace(Phi @ X).real


def linearized_gradient(H_B, Phi, X):
    A = np.eye(H_B.shape[0]) + H_B @ X @ H_B.conj().T
    G = H_B.conj().T @ np.linalg.solve(A, H_B) - Phi
    return 0.5 * (G + G.conj().T)


def fista_covariance(H_B, Phi, P0, iters=20000, tol=1e-13):
    """Maximize ln|I + H_B X H_B^H| - tr(Phi X) over {X >= 0, tr X <= P0}.

    Accelerated projected gradient with function-value restarts and a fixed
    step 1 / L, L = ||H_B^H H_B||^2 bounding the Hessian of the log-det term.
    """
    nt = H_B.shape[1]
    L = np.linalg.norm(H_B.conj().T @ H_B, 2) ** 2
    step = 1.0 / max(L, 1e-12)
    X = project_feasible(np.eye(nt) * P0 / nt, P0)
    Y, t = X.copy(), 1.0
    f = linearized_objective(H_B, Phi, X)
    for _ in range(iters):
        Xn = project_feasible(Y + step * linearized_gradient(H_B, Phi, Y), P0)
        fn = linearized_objective(H_B, Phi, Xn)
        if fn < f:  # restart momentum
            Y, t = X.copy(), 1.0
            continue
        tn = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        Y = Xn + ((t - 1) / tn) * (Xn - X)
        done = fn - f <= tol * max(1.0, abs(fn))
        X, f, t = Xn, fn, tn
        if done:
            break
    return X, f


def tiny_grid_secrecy(ch, P0, n_phase=10_000, n_power=1_000):
    """Exhaustive (phase, power) grid maximum of C_B - C_E, clamped at 0.

    For ``Nt = Nr = Ne = N = 1`` the composite gains are affine in the single
    reflection coefficient, so the rates are explicit scalar formulas.
    """
    phi = np.arange(n_phase) * (2 * np.pi / n_phase)
    theta = np.exp(1j * phi)
    hb = ch.Hn_AB[0, 0] + ch.Hn_IB[0, 0] * theta * ch.H_AI[0, 0]
    he = ch.Hn_AE[0, 0] + ch.Hn_IE[0, 0] * theta * ch.H_AI[0, 0]
    p = np.linspace(0.0, P0, n_power)
    gb = np.abs(hb)[:, None] ** 2 * p[None, :]
    ge = np.abs(he)[:, None] ** 2 * p[None, :]
    cs = np.log1p(gb) - np.log1p(ge)
    return max(float(cs.max()), 0.0)

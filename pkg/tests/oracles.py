"""Independent numeric oracles.

Nothing here calls into the package under test: conjugates, objectives and
projections are re-derived and minimized with generic numerical methods.
"""
import numpy as np
from scipy import optimize

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a, b, tol=1e-13, max_iter=500):
    """Minimize a unimodal scalar function on [a, b]."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def grid_then_golden(f, a, b, n_grid=2001):
    """Scan a grid for the best point, then refine with golden section."""
    xs = np.linspace(a, b, n_grid)
    vals = np.array([f(x) for x in xs])
    k = int(np.argmin(vals))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, n_grid - 1)]
    return golden_section(f, lo, hi)


# ---- smoothed hinge, written out from its piecewise definition ---------------

def hinge(u, y):
    m = y * u
    if m >= 1:
        return 0.0
    if m < 0:
        return 0.5 - m
    return 0.5 * (1 - m) ** 2


def hinge_conj(a, y):
    s = y * a
    if s < -1 or s > 0:
        return np.inf
    return s + 0.5 * a * a


def numeric_conjugate(f, a, lo=-60.0, hi=60.0):
    """``sup_u a u - f(u)`` over [lo, hi] (grid + golden section)."""
    u = grid_then_golden(lambda t: -(a * t - f(t)), lo, hi, n_grid=24001)
    return a * u - f(u)


def prox_dual_hinge_oracle(u, y, C):
    """argmin_x (C/2)(x - u)^2 + f*(x) over the conjugate domain."""
    lo, hi = min(-y, 0.0), max(-y, 0.0)
    # strongly convex: a coarse grid only has to locate the basin
    return grid_then_golden(lambda x: 0.5 * C * (x - u) ** 2 + hinge_conj(x, y), lo, hi, 201)


def logistic_conj(a, y):
    t = -y * a
    if t < 0 or t > 1:
        return np.inf
    out = 0.0
    if t > 0:
        out += t * np.log(t)
    if t < 1:
        out += (1 - t) * np.log(1 - t)
    return out


def prox_dual_logistic_oracle(u, y, C):
    lo, hi = min(-y, 0.0), max(-y, 0.0)
    return grid_then_golden(lambda x: 0.5 * C * (x - u) ** 2 + logistic_conj(x, y), lo, hi, 201)


# ---- group elastic net ------------------------------------------------------

def project_ball(v, r):
    nv = np.linalg.norm(v)
    return v if nv <= r else v * (r / nv)


def prox_group_pg(q, groups, weights, eps, scale, n_iter=300):
    """prox of ``scale * sum_g c_g (||u_g|| + eps/2 ||u_g||^2)`` by projected gradient.

    Uses the saddle form ``s c ||u|| = max_{||v|| <= s c} <v, u>``: for fixed v
    the inner minimizer is ``u = (q - v) / (1 + s eps c)`` and the dual is
    ``min_{||v|| <= s c} ||q - v||^2 / (2 (1 + s eps c))``, solved here by
    projected gradient from v = 0 with half the 1/L step, all groups at once.
    """
    q = np.asarray(q, dtype=float)
    gid = np.empty(q.size, dtype=int)
    for k, g in enumerate(groups):
        gid[g] = k
    c = np.asarray(weights, dtype=float)
    a = (1.0 + scale * eps * c)[gid]
    radius = scale * c
    v = np.zeros_like(q)
    for _ in range(n_iter):
        v = v + 0.5 * (q - v)  # step a/2 on the gradient -(q - v)/a
        norms = np.sqrt(np.bincount(gid, weights=v * v, minlength=c.size))
        with np.errstate(divide="ignore", invalid="ignore"):
            shrink = np.where(norms > radius, radius / norms, 1.0)
        v = v * shrink[gid]
    return (q - v) / a


def group_psi(u, groups, weights, eps):
    return sum(c * (np.linalg.norm(u[g]) + 0.5 * eps * np.linalg.norm(u[g]) ** 2)
               for g, c in zip(groups, weights))


def group_psi_conj(v, groups, weights, eps):
    """Elastic-net conjugate, group by group; requires eps * c > 0."""
    total = 0.0
    for g, c in zip(groups, weights):
        excess = max(np.linalg.norm(v[g]) - c, 0.0)
        total += excess ** 2 / (2 * eps * c)
    return total


def group_psi_conj_grad(v, groups, weights, eps):
    out = np.zeros_like(v)
    for g, c in zip(groups, weights):
        nv = np.linalg.norm(v[g])
        if nv > c:
            out[g] = (nv - c) / (eps * c) * v[g] / nv
    return out


def minimize_smooth(fun, grad, x0, bounds=None):
    """Tight L-BFGS-B solve of a smooth strongly convex problem."""
    res = optimize.minimize(
        fun, x0, jac=grad, method="L-BFGS-B", bounds=bounds,
        options={"ftol": 0.0, "gtol": 1e-13, "maxiter": 20000, "maxcor": 50},
    )
    return res.x


def prox_conj_group_oracle(q, groups, weights, eps, scale):
    """argmin_u 1/2||q - u||^2 + (s psi)*(u), with (s psi)*(u) = s psi*(u / s)."""
    def fun(u):
        return 0.5 * np.sum((q - u) ** 2) + scale * group_psi_conj(u / scale, groups, weights, eps)

    def grad(u):
        return (u - q) + group_psi_conj_grad(u / scale, groups, weights, eps)

    return minimize_smooth(fun, grad, q.copy())


# ---- subproblem objectives of one iteration --------------------------------

def y_subproblem_oracle(Z, B, x, y_old, w, rho, eta_B, n, groups, weights, eps):
    """Minimize n psi*(y/n) - <w, Zx + By> + rho/2 ||Zx + By||^2 + 1/2 ||y - y_old||_Q^2."""
    Q = rho * (eta_B * np.eye(B.shape[1]) - B.T @ B)
    zx = Z @ x

    def fun(y):
        r = zx + B @ y
        dy = y - y_old
        return (n * group_psi_conj(y / n, groups, weights, eps) - w @ r
                + 0.5 * rho * r @ r + 0.5 * dy @ Q @ dy)

    def grad(y):
        r = zx + B @ y
        return (group_psi_conj_grad(y / n, groups, weights, eps) - B.T @ w
                + rho * B.T @ r + Q @ (y - y_old))

    return minimize_smooth(fun, grad, y_old.copy())


def y_subproblem_indicator_oracle(Z, B, x, y_old, w, rho, eta_B, n, groups, weights,
                                  n_iter=20000):
    """Same subproblem with eps = 0: psi* is the indicator of ||y_g/n|| <= c_g.

    Projected gradient with step 1/L, L = sigma_max of the quadratic.
    """
    Q = rho * (eta_B * np.eye(B.shape[1]) - B.T @ B)
    H = rho * B.T @ B + Q
    L = np.linalg.eigvalsh(H).max()
    zx = Z @ x
    y = np.zeros_like(y_old)
    for _ in range(n_iter):
        g = -B.T @ w + rho * B.T @ (zx + B @ y) + Q @ (y - y_old)
        y = y - g / L
        for grp, c in zip(groups, weights):
            y[grp] = project_ball(y[grp], n * c)
    return y


def x_subproblem_oracle(Z, B, x_old, y_new, w, rho, eta, block, labels):
    """Minimize the block objective with G_II = rho (eta I - Z_I^T Z_I), box-constrained."""
    block = np.asarray(block)
    rest = np.setdiff1d(np.arange(Z.shape[1]), block)
    Z_I = Z[:, block]
    G = rho * (eta * np.eye(len(block)) - Z_I.T @ Z_I)
    base = Z[:, rest] @ x_old[rest] + B @ y_new
    xo = x_old[block]
    yl = labels[block]

    def fun(xi):
        r = Z_I @ xi + base
        conj = np.sum(yl * xi + 0.5 * xi * xi)
        d = xi - xo
        return conj - w @ (Z_I @ xi + B @ y_new) + 0.5 * rho * r @ r + 0.5 * d @ G @ d

    def grad(xi):
        r = Z_I @ xi + base
        return (yl + xi) - Z_I.T @ w + rho * Z_I.T @ r + G @ (xi - xo)

    bounds = [(min(-l, 0.0), max(-l, 0.0)) for l in yl]
    x0 = np.clip(xo, [b[0] for b in bounds], [b[1] for b in bounds])
    return minimize_smooth(fun, grad, x0, bounds=bounds)

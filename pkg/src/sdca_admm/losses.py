"""Classification losses, their conjugates and the dual-loss proximal map.

All functions broadcast over numpy arrays; ``label`` entries are +1 or -1.

With ``m = label * u`` the smoothed hinge is::

    f(u) = 0                 if m >= 1
           1/2 - m           if m < 0
           (1 - m)**2 / 2    otherwise

and its conjugate is ``f*(a) = label*a + a**2/2`` on ``label*a in [-1, 0]``.
The logistic loss ``log(1 + exp(-m))`` has the binary entropy conjugate
``f*(a) = s log s + (1-s) log(1-s)`` with ``s = -label*a in [0, 1]``.
"""
import enum

import numpy as np

__all__ = [
    "LossFamily",
    "LossConvergenceError",
    "loss_value",
    "loss_gradient",
    "loss_conjugate",
    "prox_dual_loss",
    "conjugate_subdifferential",
]


class LossFamily(str, enum.Enum):
    SMOOTHED_HINGE = "smoothed_hinge"
    LOGISTIC = "logistic"


class LossConvergenceError(RuntimeError):
    """The numeric prox of the logistic conjugate failed to converge."""


def _kind(kind):
    return LossFamily(kind)


def loss_value(kind, u, label):
    """Loss ``f(u)`` for a sample with the given label."""
    kind = _kind(kind)
    m = np.multiply(label, u, dtype=np.float64)
    if kind is LossFamily.SMOOTHED_HINGE:
        out = np.where(m >= 1.0, 0.0, np.where(m < 0.0, 0.5 - m, 0.5 * (1.0 - m) ** 2))
    else:
        out = np.logaddexp(0.0, -m)
    return out[()] if out.ndim == 0 else out


def loss_gradient(kind, u, label):
    """Derivative of :func:`loss_value` in ``u``.

    At the smoothed hinge kinks the middle-piece value is returned; the
    function is C^1 so both one-sided values agree anyway.
    """
    kind = _kind(kind)
    label = np.asarray(label, dtype=np.float64)
    m = label * np.asarray(u, dtype=np.float64)
    if kind is LossFamily.SMOOTHED_HINGE:
        dm = np.where(m > 1.0, 0.0, np.where(m < 0.0, -1.0, m - 1.0))
    else:
        # d/dm log(1 + e^-m) = -1 / (1 + e^m)
        dm = -np.exp(-np.logaddexp(0.0, m))
    out = label * dm
    return out[()] if out.ndim == 0 else out


def _entropy(s):
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(s > 0.0, s * np.log(np.where(s > 0.0, s, 1.0)), 0.0)
        b = np.where(s < 1.0, (1.0 - s) * np.log1p(-np.where(s < 1.0, s, 0.0)), 0.0)
    return a + b


def loss_conjugate(kind, a, label):
    """Convex conjugate ``f*(a)``; ``+inf`` outside ``label*a in [-1, 0]``."""
    kind = _kind(kind)
    label = np.asarray(label, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    s = label * a
    inside = (s >= -1.0) & (s <= 0.0)
    if kind is LossFamily.SMOOTHED_HINGE:
        val = s + 0.5 * a * a
    else:
        val = _entropy(np.clip(-s, 0.0, 1.0))
    out = np.where(inside, val, np.inf)
    return out[()] if out.ndim == 0 else out


def conjugate_subdifferential(kind, a, label):
    """Interval ``[lo, hi]`` equal to the subdifferential of ``f*`` at ``a``.

    Returns ``(nan, nan)`` where the subdifferential is empty (outside the
    domain, or at the logistic endpoints where the slope is infinite).
    """
    kind = _kind(kind)
    label = np.asarray(label, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    s = label * a
    if kind is LossFamily.SMOOTHED_HINGE:
        # h*(s) = s + s^2/2 on [-1, 0]; endpoints pick up the normal cone
        lo_s = np.where(s <= -1.0, -np.inf, 1.0 + s)
        hi_s = np.where(s >= 0.0, np.inf, 1.0 + s)
        empty = (s < -1.0) | (s > 0.0)
    else:
        t = -s
        with np.errstate(divide="ignore"):
            slope = np.log(np.where((t > 0) & (t < 1), t, 0.5)) - np.log1p(
                -np.where((t > 0) & (t < 1), t, 0.5)
            )
        # d/ds h*(s) with h*(s) = H(-s): -log(t/(1-t))
        lo_s = hi_s = -slope
        empty = (t <= 0.0) | (t >= 1.0)
    # map back through f*(a) = h*(label*a): subgradients scale by label
    lo = np.where(label > 0, lo_s, -hi_s)
    hi = np.where(label > 0, hi_s, -lo_s)
    lo = np.where(empty, np.nan, lo)
    hi = np.where(empty, np.nan, hi)
    return lo, hi


def prox_dual_loss(kind, u, label, C):
    """Minimizer of ``(C/2)(x - u)**2 + f*(x)``, i.e. ``prox(u | f*/C)``.

    For the smoothed hinge this is the closed form

        (C u - label) / (1 + C)   if -1 <= (C u label - 1)/(1 + C) <= 0
        -label                    if (C u label - 1)/(1 + C) < -1
        0                         otherwise

    evaluated as ``label * clip((C u label - 1)/(1 + C), -1, 0)``, which is the
    same map but keeps ``label * x`` exactly inside ``[-1, 0]``.
    """
    kind = _kind(kind)
    C = np.asarray(C, dtype=np.float64)
    if np.any(C <= 0):
        raise ValueError("C must be positive")
    label = np.asarray(label, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if kind is LossFamily.SMOOTHED_HINGE:
        m = (C * u * label - 1.0) / (1.0 + C)
        out = label * np.clip(m, -1.0, 0.0)
    else:
        out = -label * _logistic_dual_root(C * label * u, C)
    return out[()] if out.ndim == 0 else out


def _logistic_dual_root(c_yu, C, tol=1e-12, max_iter=200):
    """Solve ``C s + log(s/(1-s)) + c_yu = 0`` for ``s`` in (0, 1).

    Works in logit space, ``s = sigmoid(z)``, where the equation becomes
    ``g(z) = C sigmoid(z) + z + c_yu`` with ``1 <= g' <= 1 + C/4`` and the
    root is bracketed by ``[-c_yu - C, -c_yu]``.  Newton steps are kept when
    they stay inside the bracket and at least halve ``|g|``; otherwise the
    bracket is bisected.  For large ``C`` plain Newton can bounce between the
    two ends of the bracket forever.
    """
    c_yu, C = np.broadcast_arrays(np.asarray(c_yu, dtype=np.float64), C)
    lo = -c_yu - C
    hi = -c_yu.copy()
    z = 0.5 * (lo + hi)
    g_prev = np.full_like(z, np.inf)
    for _ in range(max_iter):
        sig = _sigmoid(z)
        g = C * sig + z + c_yu
        lo = np.where(g < 0, z, lo)
        hi = np.where(g > 0, z, hi)
        z_new = z - g / (1.0 + C * sig * (1.0 - sig))
        bisect = ~((z_new >= lo) & (z_new <= hi)) | (np.abs(g) > 0.5 * g_prev)
        z_new = np.where(bisect, 0.5 * (lo + hi), z_new)
        g_prev = np.abs(g)
        step = np.abs(z_new - z)
        z = np.where(g == 0, z, z_new)
        small = tol * np.maximum(1.0, np.abs(z))
        if np.all((g == 0) | (step <= small) | (hi - lo <= small)):
            return _sigmoid(z)
    raise LossConvergenceError(
        f"logistic dual prox did not converge in {max_iter} iterations"
    )


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))

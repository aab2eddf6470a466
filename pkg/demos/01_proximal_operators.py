"""
Proximal operators and Moreau's decomposition
==============================================

Every update of the solver is a proximal step.  This script shows the
three kinds that appear: the group soft-threshold, its conjugate
counterpart, and the dual prox of the smoothed hinge loss.
"""
import numpy as np

from sdca_admm import GroupElasticNet, LossFamily, prox_dual_loss, prox_psi, prox_psi_conjugate

# two groups of two coordinates, weight 1 each, no ridge term
reg = GroupElasticNet(groups=[[0, 1], [2, 3]], weights=[1.0, 1.0], eps=0.0)
q = np.array([3.0, 4.0, 0.3, -0.4])

# the first group has norm 5 and shrinks by 1/5; the second has norm 0.5
# and is set to zero
u = prox_psi(reg, q, scale=1.0)
print("prox_psi          ", u)

# the conjugate prox is the projection onto the dual balls ||v_g|| <= 1
v = prox_psi_conjugate(reg, q, scale=1.0)
print("prox_psi_conjugate", v)
print("sum == q:", np.allclose(u + v, q))

# a small ridge term shrinks before thresholding
ridge = GroupElasticNet(groups=[[0, 1], [2, 3]], weights=[1.0, 1.0], eps=0.5)
print("with eps=0.5      ", prox_psi(ridge, q, 1.0))

# dual prox of the smoothed hinge: the answer always satisfies -1 <= y x <= 0
for u_in in (-3.0, 0.0, 0.5, 3.0):
    x = prox_dual_loss(LossFamily.SMOOTHED_HINGE, u_in, 1.0, 2.0)
    print(f"hinge dual prox at u={u_in:+.1f}: x={x:+.4f}")

# the logistic version has no closed form and is solved by a safeguarded
# Newton iteration; its output stays strictly inside the domain
xs = prox_dual_loss(LossFamily.LOGISTIC, np.linspace(-5, 5, 5), 1.0, 2.0)
print("logistic dual prox:", np.round(xs, 4))

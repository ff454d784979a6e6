"""
Auditing a nonlinearity
=======================

Existence of ground states needs f to be odd and convex, f(s)/s increasing,
F(s) >= C_q |s|^q, and theta F(s) <= s f(s).  The audit samples these
pointwise and reports a witness for every failure.
"""

import math

from fracnehari.nonlinearity import audit, classify_growth, make_builtin, min_Cq

# The critical family with a large power coefficient passes everything
nl = make_builtin("paper_critical", lam=40, q=4, alpha0=math.pi / 4)
C_q = min_Cq(nl, 4)
print(f"largest C_q with F >= C_q s^4 on the sample: {C_q:.4f}")
report = audit(nl, theta=4, C_q=C_q, q=4)
for line in report.lines():
    print(" ", line)

# Without the power term the lower bound with C_q = 10 fails, with witnesses
weak = make_builtin("paper_critical", lam=0, q=4, alpha0=math.pi / 4)
report = audit(weak, theta=4, C_q=10, q=4)
print("lambda = 0, C_q = 10:", "pass" if report.passed else "fail")
for s, check, value in report.witness_points[:3]:
    print(f"  {check} at s={s:.4g}: {value:.3g}")

# Growth class: compare f(s) with e^{alpha s^2} - 1 along the tail
est = classify_growth(make_builtin("exp_power", alpha0=1.0, nu=2.0))
print("exp_power(nu=2):", est.growth_class, "alpha0 in", est.alpha0_bracket)
est = classify_growth(make_builtin("exp_power", alpha0=1.0, nu=1.0))
print("exp_power(nu=1):", est.growth_class)

# coding: utf-8

# # How RAMP decides it has sampled enough
#
# RAMP doubles two independent RR collections.  The first gives AMP's answer
# and an upper bound on the optimum.  The second gives a lower bound on the
# answer.  Sampling stops once lower/upper reaches 1 - 1/e - eps.

import math

from imgm.bench import erdos_renyi_graph
from imgm.instances import make_instance
from imgm.ramp import RampConfig, derive_eps_s, ramp, theta_max

# ## A low-spread instance
#
# With weak edges the optimum is barely above k, so the worst-case sample
# size is close to what is needed and several doublings are visible.

g = erdos_renyi_graph(3000, 1.0, seed=3, prob=0.05)
inst = make_instance("IM", g, "ic", k=20)

for eps in (0.5, 0.3, 0.2):
    print(f"eps={eps}: AMP step {derive_eps_s(eps)}, worst-case theta {theta_max(inst, eps, 0.01)}")

# ## The bound trajectory
#
# The tightened upper bound uses the fractional solutions seen during the
# search.  Without it the bound is coverage / (1 - 1/e - eps/2).

for tighten in (True, False):
    rep = ramp(inst, RampConfig(0.2, 0.01, tighten_bound=tighten), seed=1)
    print(f"\ntightened bound: {tighten}")
    for it, (th, lo, up, r) in enumerate(zip(rep.thetas, rep.sigma_lower, rep.sigma_upper,
                                             rep.ratios), start=1):
        print(f"  iteration {it}: theta {th:7d}  lower {lo:6.2f}  upper {up:6.2f}  ratio {r:.3f}")
    print(f"  target {rep.target_ratio:.3f}, stopped after {rep.iterations} of {rep.i_max}, "
          f"{rep.total_rr_sets} RR sets, {rep.wall_time:.2f} s")

print("\n1 - 1/e =", round(1 - 1 / math.e, 4))

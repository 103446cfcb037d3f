"""Adaptive RR sampling with martingale stopping bounds.

RAMP keeps two independent collections.  AMP selects on the first, the
first also yields an upper bound on the optimum, and the second yields a
lower bound on the selected set.  Both collections double until the bound
ratio certifies ``1 - 1/e - ε`` or the worst-case size ``θ_max`` is reached.
"""

import math
import time
from dataclasses import asdict, dataclass, field

from .errors import ConfigurationError, ValidationError
from .instances import InstanceKind, grow_collection, new_collection
from .selection import amp, amp_guarantee, coverage, greedy

EPS_S_CAP = 10**6
# R_1 uses stream indices [0, STREAM_SPLIT); R_2 starts at STREAM_SPLIT.
STREAM_SPLIT = 1 << 40
_MAX_THETA = 2**63 - 1


@dataclass(frozen=True)
class RampConfig:
    """Error tolerance, failure probability and bound options of a RAMP run."""

    eps: float
    delta: float
    tighten_bound: bool = True
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValidationError("eps must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValidationError("delta must lie in (0, 1)")


@dataclass
class RampReport:
    """Outcome and per-iteration bound history of an adaptive run."""

    algorithm: str
    result: list
    iterations: int
    i_max: int
    theta_max: int
    eps_s: float
    thetas: list = field(default_factory=list)
    sigma_lower: list = field(default_factory=list)
    sigma_upper: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    target_ratio: float = 0.0
    achieved_ratio: float = 0.0
    coverage_r1: int = 0
    coverage_r2: int = 0
    total_rr_sets: int = 0
    eps: float = 0.0
    delta: float = 0.0
    seed: int = 0
    iteration_times: list = field(default_factory=list)
    wall_time: float = 0.0

    TIMING_FIELDS = ("iteration_times", "wall_time")

    def to_dict(self, timing=True):
        d = asdict(self)
        if not timing:
            for k in self.TIMING_FIELDS:
                d.pop(k)
        return d


def derive_eps_s(eps):
    """Largest ``1/t`` whose AMP factor reaches ``1 - 1/e - eps/2``."""
    if not 0 < eps < 1 - 1 / math.e:
        raise ConfigurationError("eps must lie in (0, 1 - 1/e)")
    target = 1 - 1 / math.e - eps / 2
    for t in range(1, EPS_S_CAP + 1):
        if amp_guarantee(1.0 / t) >= target:
            return 1.0 / t
    raise ConfigurationError(f"no step 1/t with t <= {EPS_S_CAP} reaches the target")


def theta_max_value(kappa, ln_bases, eps, delta, sigma_l):
    """Unrounded worst-case sample size."""
    beta = 1 - 1 / math.e - eps / 2
    l6 = math.log(6 / delta)
    root = beta * math.sqrt(l6) + math.sqrt(beta * (ln_bases + l6))
    return 8 * kappa * root**2 / (eps**2 * sigma_l)


def _ceil_count(value):
    if not math.isfinite(value) or value > _MAX_THETA:
        raise ConfigurationError(f"sample size {value:.3g} overflows a 64-bit count")
    return max(1, math.ceil(value))


def theta_max(inst, eps, delta):
    """Worst-case collection size of an instance."""
    if inst.sigma_l_star < 1:
        raise ValidationError("sigma_l_star must be at least 1")
    return _ceil_count(theta_max_value(inst.theta_kappa, inst.ln_num_bases, eps, delta,
                                       inst.sigma_l_star))


def sigma_upper(lam_u, theta, kappa, p_f):
    """High-probability upper bound on the optimum from coverage bound ``lam_u``."""
    if lam_u < 0 or not 0 < p_f < 1:
        raise ValidationError("need lam_u >= 0 and p_f in (0, 1)")
    a = -math.log(p_f) / 2
    return (math.sqrt(lam_u + a) + math.sqrt(a)) ** 2 * kappa / theta


def sigma_lower(lam, theta, kappa, p_f):
    """High-probability lower bound on a solution with coverage ``lam``; at least 0."""
    if lam < 0 or not 0 < p_f < 1:
        raise ValidationError("need lam >= 0 and p_f in (0, 1)")
    if lam == 0:
        return 0.0
    lp = math.log(p_f)
    val = ((math.sqrt(lam - 2 * lp / 9) - math.sqrt(-lp / 2)) ** 2 + lp / 18) * kappa / theta
    return max(val, 0.0)


def _i_max(kappa):
    return max(1, math.ceil(math.log(kappa))) if kappa > 1 else 1


def _initial_theta(th_max, i_max):
    # Doubling from here reaches θ_max exactly at iteration i_max.
    return max(1, math.ceil(th_max / 2 ** (i_max - 1)))


def ramp(inst, cfg, seed=0):
    """Adaptive sampling with AMP selection.

    Guarantees ``σ(S) ≥ (1 - 1/e - ε)·σ(S*)`` with probability at least
    ``1 - δ``.
    """
    start = time.perf_counter()
    eps, delta = cfg.eps, cfg.delta
    eps_s = derive_eps_s(eps)
    beta = 1 - 1 / math.e - eps / 2
    th_max = theta_max(inst, eps, delta)
    i_max = _i_max(inst.theta_kappa)
    p_f = delta / (3 * i_max)
    target = 1 - 1 / math.e - eps
    kappa = inst.kappa
    theta = min(_initial_theta(th_max, i_max), th_max)
    r1 = new_collection(inst, theta, seed, 0, cfg.threads)
    r2 = new_collection(inst, theta, seed, STREAM_SPLIT, cfg.threads)
    report = RampReport("ramp", [], 0, i_max, th_max, eps_s, target_ratio=target,
                        eps=eps, delta=delta, seed=seed)
    for i in range(1, i_max + 1):
        t0 = time.perf_counter()
        res = amp(r1, inst.matroid, eps_s, track_bound=cfg.tighten_bound)
        cov1 = res.coverage
        if cfg.tighten_bound:
            lam_u = min(min(res.tight_bound_trace), res.f_trace[-1] / amp_guarantee(eps_s),
                        float(r1.theta))
        else:
            lam_u = cov1 / beta
        s_up = sigma_upper(lam_u, r1.theta, kappa, p_f)
        cov2 = coverage(r2, res.chosen)
        s_lo = sigma_lower(cov2, r2.theta, kappa, p_f)
        ratio = s_lo / s_up if s_up > 0 else 0.0
        report.thetas.append(r1.theta)
        report.sigma_upper.append(s_up)
        report.sigma_lower.append(s_lo)
        report.ratios.append(ratio)
        report.iteration_times.append(time.perf_counter() - t0)
        report.result, report.iterations = res.chosen, i
        report.coverage_r1, report.coverage_r2 = cov1, cov2
        report.achieved_ratio = ratio
        if ratio >= target or i == i_max:
            break
        theta = min(2 * theta, th_max)
        r1 = grow_collection(inst, r1, theta, cfg.threads)
        r2 = grow_collection(inst, r2, theta, cfg.threads)
    report.total_rr_sets = r1.theta + r2.theta
    report.wall_time = time.perf_counter() - start
    return report


def rm_a_theta_max(inst, eps, delta):
    """Worst-case sample size of the RM-A baseline."""
    n = inst.graph.node_count
    T = inst.ground.rounds
    l16 = math.log(16 / delta)
    val = 2 * n / eps**2 * (0.5 * math.sqrt(l16) + math.sqrt(0.5 * (T * n + l16))) ** 2
    return _ceil_count(val)


def rm_a_simplified(inst, eps, delta, seed=0, threads=1):
    """RM-A baseline: greedy selection, ``Λ^u = 2Λ(S)``, target ``1/2 - ε``."""
    if inst.kind is not InstanceKind.RM:
        raise ConfigurationError("rm_a_simplified applies to RM instances only")
    if not 0 < eps < 0.5 or not 0 < delta < 1:
        raise ValidationError("need eps in (0, 1/2) and delta in (0, 1)")
    start = time.perf_counter()
    T = inst.ground.rounds
    th_max = rm_a_theta_max(inst, eps, delta)
    i_max = max(1, math.ceil(math.log2(th_max)))
    p_f = delta / (4 * (T + 2) * i_max)
    target = 0.5 - eps
    kappa = inst.kappa
    theta = 1
    r1 = new_collection(inst, theta, seed, 0, threads)
    r2 = new_collection(inst, theta, seed, STREAM_SPLIT, threads)
    report = RampReport("rm-a", [], 0, i_max, th_max, 1.0, target_ratio=target,
                        eps=eps, delta=delta, seed=seed)
    for i in range(1, i_max + 1):
        t0 = time.perf_counter()
        res = greedy(r1, inst.matroid)
        s_up = sigma_upper(2.0 * res.coverage, r1.theta, kappa, p_f)
        cov2 = coverage(r2, res.chosen)
        s_lo = sigma_lower(cov2, r2.theta, kappa, p_f)
        ratio = s_lo / s_up if s_up > 0 else 0.0
        report.thetas.append(r1.theta)
        report.sigma_upper.append(s_up)
        report.sigma_lower.append(s_lo)
        report.ratios.append(ratio)
        report.iteration_times.append(time.perf_counter() - t0)
        report.result, report.iterations = res.chosen, i
        report.coverage_r1, report.coverage_r2 = res.coverage, cov2
        report.achieved_ratio = ratio
        if ratio >= target or i == i_max:
            break
        theta = min(2 * theta, th_max)
        r1 = grow_collection(inst, r1, theta, threads)
        r2 = grow_collection(inst, r2, theta, threads)
    report.total_rr_sets = r1.theta + r2.theta
    report.wall_time = time.perf_counter() - start
    return report

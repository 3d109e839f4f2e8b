"""Scalar majorant for semilocal convergence of the Josephy-Halley method.

    h(t) = kappa*l2/6 t^3 + kappa*l1/2 t^2 - t + eta

The Halley-type scalar sequences started at ``t_0 = s_0 = 0`` increase to the
smallest positive root of ``h`` whenever ``eta`` is below the threshold
returned by :func:`eta_threshold`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import NotAdmissible
from .numerics import PrecisionContext, format_scalar

# Newton polish / bisection budget; generous for 400+ digits
_MAX_BISECT = 200
_MAX_POLISH = 100


@dataclass(frozen=True)
class MajorantParams:
    kappa: object
    l1: object
    l2: object
    eta: object

    def __post_init__(self):
        if not (self.kappa > 0 and self.l1 > 0 and self.eta > 0):
            raise ValueError("kappa, l1 and eta must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be nonnegative")


@dataclass(frozen=True)
class CertificateInput:
    params: MajorantParams
    a: object
    b: object
    y0_norm: object

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.y0_norm < 0:
            raise ValueError("a, b and y0_norm must be nonnegative")


@dataclass
class MajorantReport:
    eta_max: object
    admissible: bool
    t_bar: object = None
    t_hat: object = None
    s_seq: list = field(default_factory=list)
    t_seq: list = field(default_factory=list)
    conditions: dict = field(default_factory=dict)
    alpha_fit: object = None
    M_fit: object = None

    @property
    def passed(self) -> bool:
        return bool(self.conditions) and all(self.conditions.values())

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def h_eval(p: MajorantParams, t, ctx: PrecisionContext):
    """Return ``(h(t), h'(t), h''(t))``."""
    mp = ctx.mp
    t = mp.mpf(t)
    kl1 = p.kappa * p.l1
    kl2 = p.kappa * p.l2
    h = kl2 / 6 * t**3 + kl1 / 2 * t**2 - t + p.eta
    dh = kl2 / 2 * t**2 + kl1 * t - 1
    d2h = kl2 * t + kl1
    return h, dh, d2h


def eta_threshold(kappa, l1, l2, ctx: PrecisionContext):
    """Largest eta for which h still has two positive roots (exclusive)."""
    mp = ctx.mp
    kl1 = mp.mpf(kappa) * l1
    root = mp.sqrt(kl1**2 + 2 * mp.mpf(kappa) * l2)
    return 2 * (kl1 + 2 * root) / (3 * (kl1 + root) ** 2)


def stationary_point(p: MajorantParams, ctx: PrecisionContext):
    """Positive root of h' (the minimizer of h on t > 0)."""
    mp = ctx.mp
    kl1, kl2 = p.kappa * p.l1, p.kappa * p.l2
    if kl2 == 0:
        return 1 / kl1
    # rationalized form of (-kl1 + sqrt(kl1^2 + 2 kl2)) / kl2, stable for small kl2
    return 2 / (kl1 + mp.sqrt(kl1**2 + 2 * kl2))


def _bracketed_root(p, lo, hi, ctx):
    """Root of h in [lo, hi] given a sign change; bisection then Newton polish."""
    mp = ctx.mp
    h_lo = h_eval(p, lo, ctx)[0]
    # bisect until Newton is safe, then polish
    for _ in range(_MAX_BISECT):
        mid = (lo + hi) / 2
        hm = h_eval(p, mid, ctx)[0]
        if hm == 0:
            return mid
        if (hm > 0) == (h_lo > 0):
            lo, h_lo = mid, hm
        else:
            hi = mid
        if hi - lo < mp.mpf(2) ** -60 * (1 + abs(hi)):
            break
    t = (lo + hi) / 2
    tol = ctx.eps(20)
    for _ in range(_MAX_POLISH):
        h, dh, _ = h_eval(p, t, ctx)
        if abs(h) <= tol / 2**40 or dh == 0:
            break
        t_new = t - h / dh
        if not lo <= t_new <= hi:
            # left the bracket (near tangency): fall back to bisection
            mid = (lo + hi) / 2
            if (h_eval(p, mid, ctx)[0] > 0) == (h_lo > 0):
                lo = mid
            else:
                hi = mid
            t_new = (lo + hi) / 2
        if t_new == t:
            break
        t = t_new
    return t


def roots_of_h(p: MajorantParams, ctx: PrecisionContext):
    """The two positive roots ``t_bar <= t_hat`` of h."""
    mp = ctx.mp
    if not p.eta < eta_threshold(p.kappa, p.l1, p.l2, ctx):
        raise NotAdmissible("eta is not below the admissibility threshold")
    kl1, kl2 = p.kappa * p.l1, p.kappa * p.l2
    if kl2 == 0:
        disc = mp.sqrt(1 - 2 * kl1 * p.eta)
        # t_bar via the cancellation-free form
        return 2 * p.eta / (1 + disc), (1 + disc) / kl1
    t_star = stationary_point(p, ctx)
    t_bar = _bracketed_root(p, mp.zero, t_star, ctx)
    big = 2 * t_star
    while h_eval(p, big, ctx)[0] <= 0:
        big *= 2
    t_hat = _bracketed_root(p, t_star, big, ctx)
    return t_bar, t_hat


def majorant_sequences(p: MajorantParams, n: int, ctx: PrecisionContext):
    """``(s_0..s_n, t_0..t_n)`` from t_0 = s_0 = 0.

    s_{k+1} = t_k - h(t_k)/h'(t_k)
    t_{k+1} = t_k - h(t_k)/(h'(t_k) + h''(t_k)(s_{k+1} - t_k)/2)
    """
    mp = ctx.mp
    if not p.eta < eta_threshold(p.kappa, p.l1, p.l2, ctx):
        raise NotAdmissible("eta is not below the admissibility threshold")
    s_seq, t_seq = [mp.zero], [mp.zero]
    t = mp.zero
    for _ in range(n):
        h, dh, d2h = h_eval(p, t, ctx)
        s = t - h / dh
        t = t - h / (dh + d2h * (s - t) / 2)
        s_seq.append(s)
        t_seq.append(t)
    return s_seq, t_seq


def envelope_fit(t_bar, t_seq, ctx: PrecisionContext, zero_offset: int = 20):
    """Least-squares fit of ``log(t_bar - t_k) = log M + 3^k log alpha``.

    An empirical description of the R-cubic decay, not a proof constant.
    Returns ``(alpha, M)`` or ``(None, None)`` with fewer than two usable gaps.
    """
    mp = ctx.mp
    floor = ctx.eps(zero_offset)
    pts = [(mp.mpf(3) ** k, mp.log(t_bar - t)) for k, t in enumerate(t_seq) if t_bar - t > floor]
    if len(pts) < 2:
        return None, None
    n = len(pts)
    sx = sum(x for x, _ in pts)
    sy = sum(y for _, y in pts)
    sxx = sum(x * x for x, _ in pts)
    sxy = sum(x * y for x, y in pts)
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    intercept = (sy - slope * sx) / n
    return mp.exp(slope), mp.exp(intercept)


def certify(inp: CertificateInput, ctx: PrecisionContext, steps: int = 8) -> MajorantReport:
    """Check the four semilocal conditions.

    kappa*|y0| < eta,  eta < eta_max,  3 l1/2 t_bar^2 + |y0| < b,  t_bar < a.
    Conditions that need t_bar are reported False when h has no positive root.
    """
    p = inp.params
    eta_max = eta_threshold(p.kappa, p.l1, p.l2, ctx)
    admissible = bool(p.eta < eta_max)
    report = MajorantReport(eta_max, admissible)
    cond = {
        "kappa_y0_lt_eta": bool(p.kappa * inp.y0_norm < p.eta),
        "eta_lt_eta_max": admissible,
    }
    if admissible:
        report.t_bar, report.t_hat = roots_of_h(p, ctx)
        tb = report.t_bar
        cond["range_radius"] = bool(3 * p.l1 / 2 * tb**2 + inp.y0_norm < inp.b)
        cond["domain_radius"] = bool(tb < inp.a)
    else:
        cond["range_radius"] = False
        cond["domain_radius"] = False
    report.conditions = cond
    if report.passed:
        report.s_seq, report.t_seq = majorant_sequences(p, steps, ctx)
        report.alpha_fit, report.M_fit = envelope_fit(report.t_bar, report.t_seq, ctx)
    return report


CONDITION_LABELS = {
    "kappa_y0_lt_eta": "kappa*||y0|| < eta",
    "eta_lt_eta_max": "eta < eta_max",
    "range_radius": "3*l1/2*t_bar^2 + ||y0|| < b",
    "domain_radius": "t_bar < a",
}


def report_to_dict(report: MajorantReport, inp: CertificateInput, ctx: PrecisionContext,
                   digits: int = 40) -> dict:
    def s(x):
        return None if x is None else format_scalar(x, ctx, digits)

    p = inp.params
    return {
        "input": {
            "kappa": s(p.kappa), "l1": s(p.l1), "l2": s(p.l2), "eta": s(p.eta),
            "a": s(inp.a), "b": s(inp.b), "y0_norm": s(inp.y0_norm),
        },
        "eta_max": s(report.eta_max),
        "admissible": report.admissible,
        "t_bar": s(report.t_bar),
        "t_hat": s(report.t_hat),
        "conditions": report.conditions,
        "certificate": report.verdict,
        "s_seq": [s(v) for v in report.s_seq],
        "t_seq": [s(v) for v in report.t_seq],
        "alpha_fit": s(report.alpha_fit),
        "M_fit": s(report.M_fit),
        "fit_note": "empirical least-squares envelope, not a proof constant",
    }


def report_to_json(report, inp, ctx, digits: int = 40) -> str:
    return json.dumps(report_to_dict(report, inp, ctx, digits), indent=2) + "\n"

"""Fluid (deterministic) approximation of the stochastic process.

The fluid pair (y1, y2) solves dy1/dt = y1*(b(y2) - d(y2)) and
dy2/dt = y1*b(y2) from (1, 1); y2 is strictly increasing, so every
characteristic quantity can be parametrized by total progeny instead of
time.  Along the solution the algebraic relation
y1 = y2 - integral_1^y2 d(u)/b(u) du holds, which yields closed forms for
Model 1 (b = lam/x) and Model 2 (b = lam*exp(-x/alpha)), and quadrature
routes for everything else.

The fluid extinction time is infinite (y1 only reaches 0 in the limit), so
extinction is estimated by anchoring a pure-death clearing stage either at
the time the descending population passes a small level eps, or at the
last-birth proxy y2(inf) - 1.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq
from scipy.special import digamma

from .errors import (
    BracketError,
    DomainError,
    EstimatorUndefinedError,
    QuadratureError,
    StiffnessError,
    SubcriticalModelError,
)
from .models import Custom, Model1, Model2, RateModel, domain_max

__all__ = [
    "NumericOptions",
    "FluidCurve",
    "Model1Analytic",
    "FluidSummary",
    "ExtinctionEstimate",
    "MinimizeResult",
    "integrate_fluid",
    "y1_of_y2",
    "y2_at_tmax",
    "y1_at_tmax",
    "y2_at_extinction",
    "time_of_y2",
    "t_max",
    "t_eps",
    "expected_max_exponentials",
    "harmonic_number",
    "alternating_harmonic_sum",
    "t_ext_eps",
    "t_ext_star",
    "lambda_of_y2star",
    "t_eps_of_y2star",
    "minimize_t_eps",
    "fluid_summary",
]


@dataclass(frozen=True)
class NumericOptions:
    quad_rel_tol: float = 1e-10
    root_tol: float = 1e-12
    # 1e-10 keeps the ODE-vs-closed-form residual comfortably under the
    # 1e-6 oracle tolerance (1e-9 leaves it marginal at Model-2 scales)
    ode_rel_tol: float = 1e-10
    bracket_growth: float = 2.0
    max_iters: int = 100

    def __post_init__(self):
        for name in ("quad_rel_tol", "root_tol", "ode_rel_tol"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        if not self.bracket_growth > 1.0:
            raise ValueError("bracket_growth must be > 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


_DEFAULT = NumericOptions()


@dataclass(frozen=True)
class FluidCurve:
    """ODE solution samples plus a dense interpolant (see .at())."""

    times: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    rel_tol: float
    _dense: object = None

    def at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Dense-output evaluation of (y1, y2) at arbitrary times."""
        out = self._dense(np.asarray(t, dtype=np.float64))
        return out[0], out[1]


@dataclass(frozen=True)
class FluidSummary:
    """Characteristic fluid quantities of a model."""

    y2_tmax: float
    y1_tmax: float
    t_max: float
    y2_inf: float


@dataclass(frozen=True)
class ExtinctionEstimate:
    """One extinction-time approximation and its intermediate quantities.

    method is "epsilon" (anchor where the descending population passes
    eps) or "star" (anchor at the last-birth proxy y2(inf) - 1); t_ext =
    t_anchor + tail_mean, the expected clearing time of a pure-death stage
    started with pop_at_anchor individuals at rate d(y2_anchor).
    """

    method: str
    eps: int | None
    t_anchor: float
    y2_anchor: float
    pop_at_anchor: float
    tail_mean: float
    t_ext: float


@dataclass(frozen=True)
class MinimizeResult:
    """Outcome of the extinction-proxy minimization over y2*.

    converged is False when the objective was monotone over the whole
    search range; `monotone` then says in which direction, and the other
    fields hold the best point seen.
    """

    y2star: float
    lam: float
    t_eps: float
    converged: bool
    monotone: str | None = None


def _quad(f, a: float, b: float, opts: NumericOptions) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, _ = quad(f, a, b, epsabs=0.0, epsrel=opts.quad_rel_tol, limit=200)
        except IntegrationWarning as w:
            raise QuadratureError(f"quadrature on [{a:g}, {b:g}] did not converge: {w}") from w
    return val


def integrate_fluid(model: RateModel, t_end: float, opts: NumericOptions = _DEFAULT) -> FluidCurve:
    """Integrate the fluid ODE system from (1, 1) up to t_end."""
    if not t_end > 0:
        raise DomainError(f"t_end must be > 0, got {t_end}")

    def rhs(t, y):
        b = model.birth(y[1])
        d = model.death(y[1])
        return (y[0] * (b - d), y[0] * b)

    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        (1.0, 1.0),
        method="RK45",
        rtol=opts.ode_rel_tol,
        atol=opts.ode_rel_tol * 1e-3,
        dense_output=True,
    )
    if not sol.success:
        raise StiffnessError(f"ODE integration failed: {sol.message}")
    return FluidCurve(times=sol.t, y1=sol.y[0], y2=sol.y[1], rel_tol=opts.ode_rel_tol, _dense=sol.sol)


def _y1_of_y2_raw(model: RateModel, y2: float, opts: NumericOptions) -> float:
    """The relation y1 = y2 - integral_1^y2 d/b du, without domain caps.

    Used internally where evaluation beyond y2(inf) (giving y1 < 0) is
    needed for bracketing.
    """
    if isinstance(model, Model1):
        half = model.mu / (2.0 * model.lam)
        return y2 - half * y2 * y2 + half
    if isinstance(model, Model2):
        coef = model.alpha * model.mu / model.lam
        return y2 - coef * math.exp(y2 / model.alpha) + coef * math.exp(1.0 / model.alpha)
    return y2 - _quad(lambda u: model.death(u) / model.birth(u), 1.0, y2, opts)


def y1_of_y2(model: RateModel, y2: float, opts: NumericOptions = _DEFAULT) -> float:
    """Fluid population as a function of total progeny, on [1, y2(inf)]."""
    if not y2 >= 1.0:
        raise DomainError(f"y2 must be >= 1, got {y2}")
    y2_inf = y2_at_extinction(model, opts)
    if y2 > y2_inf * (1.0 + 1e-12):
        raise DomainError(f"y2={y2} exceeds the total progeny at extinction {y2_inf}")
    return _y1_of_y2_raw(model, y2, opts)


def y2_at_tmax(model: RateModel, opts: NumericOptions = _DEFAULT) -> float:
    """Total progeny at the population peak: the root of b(x) = d(x).

    Raises SubcriticalModelError when b(1) < d(1) (the fluid population
    only decreases); b(1) = d(1) returns 1 (peak at the start).
    """
    if isinstance(model, Model1):
        if model.lam < model.mu:
            raise SubcriticalModelError(
                f"b(1)={model.lam} < d(1)={model.mu}: population declines from the start"
            )
        return model.lam / model.mu
    if isinstance(model, Model2):
        v = model.alpha * math.log(model.lam / model.mu)
        if v < 1.0:
            raise SubcriticalModelError(
                f"b(1)={model.birth(1.0)} < d(1)={model.mu}: population declines from the start"
            )
        return v

    b1, d1 = model.birth(1.0), model.death(1.0)
    if b1 < d1:
        raise SubcriticalModelError(
            f"b(1)={b1} < d(1)={d1}: population declines from the start"
        )
    if b1 == d1:
        return 1.0
    f = lambda x: model.birth(x) - model.death(x)
    hi_cap = domain_max(model)
    hi = min(2.0, hi_cap)
    for _ in range(opts.max_iters):
        if f(hi) < 0.0 or hi == hi_cap:
            break
        hi = min(hi * opts.bracket_growth, hi_cap)
    else:
        raise BracketError("no subcritical point found: b(x) stays above d(x)")
    if f(hi) > 0.0:
        raise BracketError("no subcritical point found: b(x) stays above d(x)")
    return brentq(f, 1.0, hi, xtol=1e-13, rtol=8.9e-16)


def y1_at_tmax(model: RateModel, opts: NumericOptions = _DEFAULT) -> float:
    """Peak fluid population, y1 evaluated at the b = d progeny level."""
    return _y1_of_y2_raw(model, y2_at_tmax(model, opts), opts)


@functools.lru_cache(maxsize=256)
def _y2_inf_cached(model: RateModel, opts: NumericOptions) -> float:
    if isinstance(model, Model1):
        lam, mu = model.lam, model.mu
        return (lam + math.hypot(lam, mu)) / mu
    f = lambda y: _y1_of_y2_raw(model, y, opts)
    hi_cap = domain_max(model)
    lo = 1.0
    hi = 2.0 if hi_cap > 2.0 else 0.5 * (1.0 + hi_cap)
    for _ in range(opts.max_iters):
        if f(hi) < 0.0:
            break
        lo = hi
        nxt = hi * opts.bracket_growth
        if nxt >= hi_cap:
            # d/b may diverge at a finite domain endpoint; creep toward it
            nxt = 0.5 * (hi + hi_cap)
        hi = nxt
    else:
        raise BracketError("fluid population never reaches zero: no root bracket found")
    root = brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16)
    residual = abs(_y1_of_y2_raw(model, root, opts))
    if residual > opts.root_tol * root:
        raise BracketError(
            f"root residual {residual:g} exceeds tolerance {opts.root_tol * root:g}"
        )
    return root


def y2_at_extinction(model: RateModel, opts: NumericOptions = _DEFAULT) -> float:
    """Total progeny at extinction, y2(inf): closed form for Model 1, a
    bracketed root of y1(y2) = 0 otherwise."""
    return _y2_inf_cached(model, opts)


@dataclass(frozen=True)
class Model1Analytic:
    """Closed-form time parametrization for Model 1.

    c is the positive root of c^2 = 1 + (lam/mu)^2; the time formula is
    invariant under c -> -c, which the tests assert.
    """

    lam: float
    mu: float
    c: float

    @classmethod
    def from_model(cls, model: Model1) -> "Model1Analytic":
        r = model.lam / model.mu
        return cls(lam=model.lam, mu=model.mu, c=math.hypot(1.0, r))

    def time_of_y2(self, y2: float, c: float | None = None) -> float:
        """Time at which total progeny reaches y2 (y2 < y2(inf))."""
        if c is None:
            c = self.c
        r = self.lam / self.mu
        term1 = (1.0 - r / c) * math.log((1.0 - r + c) / (y2 - r + c))
        term2 = (1.0 + r / c) * math.log((r + c - 1.0) / (r + c - y2))
        return (term1 + term2) / self.mu

    def t_max_closed_form(self) -> float:
        """Peak time evaluated directly (log-of-c form), for cross-checks."""
        r = self.lam / self.mu
        c = self.c
        return (
            (1.0 - r / c) * math.log(1.0 - r + c)
            + (1.0 + r / c) * math.log(r + c - 1.0)
            - 2.0 * math.log(c)
        ) / self.mu


def time_of_y2(model: RateModel, y2: float, opts: NumericOptions = _DEFAULT) -> float:
    """Time at which the fluid total progeny reaches y2 (strictly below
    y2(inf): the fluid extinction time is infinite)."""
    if not y2 >= 1.0:
        raise DomainError(f"y2 must be >= 1, got {y2}")
    y2_inf = y2_at_extinction(model, opts)
    if y2 >= y2_inf:
        raise DomainError(
            f"t(y2) diverges at the total progeny at extinction: need y2 < {y2_inf}, got {y2}"
        )
    if y2 == 1.0:
        return 0.0
    if isinstance(model, Model1):
        return Model1Analytic.from_model(model).time_of_y2(y2)
    if isinstance(model, Model2):
        lam, alpha, mu = model.lam, model.alpha, model.mu
        am = alpha * mu

        def integrand(u):
            return 1.0 / (lam * u * math.exp(-u / alpha) - am + am * math.exp(-(u - 1.0) / alpha))

        return _quad(integrand, 1.0, y2, opts)

    def integrand(u):
        return 1.0 / (_y1_of_y2_raw(model, u, opts) * model.birth(u))

    return _quad(integrand, 1.0, y2, opts)


def t_max(model: RateModel, opts: NumericOptions = _DEFAULT) -> float:
    """Fluid time to reach the maximum population size."""
    return time_of_y2(model, y2_at_tmax(model, opts), opts)


def t_eps(model: RateModel, eps: float, opts: NumericOptions = _DEFAULT) -> tuple[float, float]:
    """(t_eps, y2(t_eps)): when the descending fluid population passes eps.

    Defined for 1 <= eps <= y1(t_max); the anchor progeny y2(t_eps) is the
    larger root of y1(y2) = eps.
    """
    if not eps >= 1.0:
        raise DomainError(f"eps must be >= 1, got {eps}")
    peak = y1_at_tmax(model, opts)
    if eps > peak * (1.0 + 1e-12):
        raise DomainError(f"eps={eps} exceeds the fluid peak population {peak}")
    if isinstance(model, Model1):
        lam, mu = model.lam, model.mu
        disc = lam * lam + mu * mu - 2.0 * eps * mu * lam
        if disc < 0.0:  # eps == peak up to roundoff
            disc = 0.0
        y2s = (lam + math.sqrt(disc)) / mu
    else:
        lo = y2_at_tmax(model, opts)
        hi = y2_at_extinction(model, opts)
        f = lambda y: _y1_of_y2_raw(model, y, opts) - eps
        if f(lo) <= 0.0:
            y2s = lo
        else:
            y2s = brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16)
    return time_of_y2(model, y2s, opts), y2s


def harmonic_number(n: float) -> float:
    """H(n): the exact partial sum at integers, the digamma interpolation
    H(n) = psi(n + 1) + gamma at non-integer n >= 0."""
    if n < 0:
        raise DomainError(f"harmonic_number needs n >= 0, got {n}")
    if float(n).is_integer() and n <= 1e6:
        return math.fsum(1.0 / j for j in range(1, int(n) + 1))
    return float(digamma(n + 1.0)) + float(np.euler_gamma)


def alternating_harmonic_sum(n: int) -> float:
    """sum_{j=1..n} C(n,j) (-1)^(j-1) / j; equals H(n) but is numerically
    unstable for large n, so it serves as a small-n oracle only."""
    return math.fsum(math.comb(n, j) * (-1.0) ** (j - 1) / j for j in range(1, n + 1))


def expected_max_exponentials(n: float, rate: float) -> float:
    """Expected maximum of n i.i.d. exponentials with the given rate, H(n)/rate.

    n may be fractional (harmonic interpolation); values slightly below 1
    arise from real-valued anchor populations and are accepted.
    """
    if not n > 0.0:
        raise DomainError(f"need n > 0, got {n}")
    if not rate > 0.0:
        raise DomainError(f"need rate > 0, got {rate}")
    return harmonic_number(n) / rate


def t_ext_eps(model: RateModel, eps: int, opts: NumericOptions = _DEFAULT) -> ExtinctionEstimate:
    """Extinction estimate t_eps + expected pure-death clearing time of eps
    individuals at rate d(y2(t_eps))."""
    t_anchor, y2s = t_eps(model, eps, opts)
    tail = expected_max_exponentials(float(eps), model.death(y2s))
    return ExtinctionEstimate(
        method="epsilon",
        eps=int(eps),
        t_anchor=t_anchor,
        y2_anchor=y2s,
        pop_at_anchor=float(eps),
        tail_mean=tail,
        t_ext=t_anchor + tail,
    )


def t_ext_star(model: RateModel, opts: NumericOptions = _DEFAULT) -> ExtinctionEstimate:
    """Extinction estimate anchored at the last-birth proxy z = y2(inf) - 1.

    The population at the anchor, y1(t(z)), is real-valued; the clearing
    stage uses the continuous harmonic interpolation so the estimate is
    smooth in the model parameters.
    """
    y2_inf = y2_at_extinction(model, opts)
    if not y2_inf > 2.0:
        raise DomainError(f"need y2(inf) > 2 for the last-birth anchor, got {y2_inf}")
    z = y2_inf - 1.0
    t_anchor = time_of_y2(model, z, opts)
    pop = _y1_of_y2_raw(model, z, opts)
    # the real-valued anchor population must round to at least one
    # individual; for Model 1 it sits just below 1 (= sqrt(lam^2+mu^2)/lam
    # - mu/(2 lam)), which the harmonic interpolation handles smoothly
    if pop < 0.5:
        raise EstimatorUndefinedError(
            f"population at the last-birth anchor is {pop:g}; estimator undefined"
        )
    tail = expected_max_exponentials(pop, model.death(z))
    return ExtinctionEstimate(
        method="star",
        eps=None,
        t_anchor=t_anchor,
        y2_anchor=z,
        pop_at_anchor=pop,
        tail_mean=tail,
        t_ext=t_anchor + tail,
    )


def lambda_of_y2star(alpha: float, mu: float, eps: float, y2star: float) -> float:
    """Birth-rate scale for which the descending fluid population passes eps
    at total progeny y2star (Model 2)."""
    if not y2star > max(1.0, eps):
        raise DomainError(f"y2star must exceed max(1, eps)={max(1.0, eps)}, got {y2star}")
    return alpha * mu * (math.exp(y2star / alpha) - math.exp(1.0 / alpha)) / (y2star - eps)


def t_eps_of_y2star(
    alpha: float, mu: float, eps: float, y2star: float, opts: NumericOptions = _DEFAULT
) -> float:
    """t_eps for Model 2 parametrized by the anchor progeny y2star instead
    of lam (the two routes agree to quadrature accuracy)."""
    if not y2star > max(1.0, eps):
        raise DomainError(f"y2star must exceed max(1, eps)={max(1.0, eps)}, got {y2star}")
    pref = (y2star - eps) / (alpha * mu)

    def integrand(y2):
        denom = (
            (y2star - y2 - eps) * math.exp((1.0 - y2) / alpha)
            + y2 * math.exp((y2star - y2) / alpha)
            - (y2star - eps)
        )
        return pref / denom

    return _quad(integrand, 1.0, y2star, opts)


def _descending_branch_edge(alpha: float, mu: float, eps: float, opts: NumericOptions) -> float:
    """Smallest y2star on the descending branch (where eps <= peak population).

    Below this edge the y2star parametrization describes the ascending
    crossing of level eps instead of the descent.
    """
    lo = max(1.0, float(eps))
    if eps <= 1.0:
        return lo
    h = lambda y: (y - eps) - alpha * (1.0 - math.exp((1.0 - y) / alpha))
    hi = lo + alpha
    for _ in range(opts.max_iters):
        if h(hi) > 0.0:
            break
        hi *= opts.bracket_growth
    else:
        raise BracketError("could not bracket the descending-branch edge")
    return brentq(h, lo, hi, xtol=1e-13, rtol=8.9e-16)


def minimize_t_eps(
    alpha: float, mu: float, eps: float, opts: NumericOptions = _DEFAULT
) -> MinimizeResult:
    """Minimize t_eps over the anchor progeny y2star (equivalently over lam,
    since y2star is strictly increasing in lam).

    Expands a bracket certifying a V-shape, then golden-section searches
    it.  A monotone objective is reported, not raised.
    """
    if not eps >= 1.0:
        raise DomainError(f"eps must be >= 1, got {eps}")
    edge = _descending_branch_edge(alpha, mu, eps, opts)
    obj = lambda y: t_eps_of_y2star(alpha, mu, eps, y, opts)

    # geometric probe ladder in the offset from the branch edge
    grow = 1.6
    step0 = 0.5 * alpha
    xs = [edge + step0]
    fs = [obj(xs[0])]
    bracket = None
    for k in range(1, opts.max_iters):
        x = edge + step0 * grow**k
        xs.append(x)
        fs.append(obj(x))
        if len(fs) >= 3 and fs[-2] < fs[-3] and fs[-2] < fs[-1]:
            bracket = (xs[-3], xs[-2], xs[-1])
            break
        if len(fs) >= 2 and fs[-1] > fs[-2] and len(fs) == 2:
            break  # increasing from the first probe: search toward the edge
    if bracket is None and len(fs) >= 2 and fs[1] > fs[0]:
        # walk down toward the edge until the objective turns
        x_hi, f_hi = xs[1], fs[1]
        x_mid, f_mid = xs[0], fs[0]
        step = step0
        for _ in range(opts.max_iters):
            step /= grow
            if step < 1e-9 * alpha:
                best = (x_mid, f_mid) if f_mid < f_hi else (x_hi, f_hi)
                return MinimizeResult(
                    y2star=best[0],
                    lam=lambda_of_y2star(alpha, mu, eps, best[0]),
                    t_eps=best[1],
                    converged=False,
                    monotone="increasing",
                )
            x = edge + step
            fx = obj(x)
            if fx > f_mid:
                bracket = (x, x_mid, x_hi)
                break
            x_hi, f_hi = x_mid, f_mid
            x_mid, f_mid = x, fx
    if bracket is None:
        k = len(fs) - 1
        return MinimizeResult(
            y2star=xs[k],
            lam=lambda_of_y2star(alpha, mu, eps, xs[k]),
            t_eps=fs[k],
            converged=False,
            monotone="decreasing",
        )

    a, m, b = _golden_min(obj, *bracket)
    y2s = m
    return MinimizeResult(
        y2star=y2s,
        lam=lambda_of_y2star(alpha, mu, eps, y2s),
        t_eps=obj(y2s),
        converged=True,
    )


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a: float, m: float, b: float, rel_tol: float = 1e-9) -> tuple[float, float, float]:
    """Golden-section search inside a bracket (a, m, b) with f(m) < f(a), f(b)."""
    fm = f(m)
    while (b - a) > rel_tol * (abs(a) + abs(b)) + 1e-12:
        # probe inside the larger sub-interval
        if (m - a) > (b - m):
            x = m - (1.0 - _INVPHI) * (m - a)
            fx = f(x)
            if fx < fm:
                b, m, fm = m, x, fx
            else:
                a = x
        else:
            x = m + (1.0 - _INVPHI) * (b - m)
            fx = f(x)
            if fx < fm:
                a, m, fm = m, x, fx
            else:
                b = x
    return a, m, b


def fluid_summary(model: RateModel, opts: NumericOptions = _DEFAULT) -> FluidSummary:
    """Peak progeny/population, peak time, and progeny at extinction."""
    return FluidSummary(
        y2_tmax=y2_at_tmax(model, opts),
        y1_tmax=y1_at_tmax(model, opts),
        t_max=t_max(model, opts),
        y2_inf=y2_at_extinction(model, opts),
    )

"""Rate models: per-individual birth and death rates as functions of total progeny.

The stochastic process lives on states (z, x) with z the population size and
x the total progeny; both rates depend on x only.  The domain is real x >= 1
(the fluid side evaluates at reals, the stochastic side at integers); the SIR
model additionally requires x <= n_pop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import expr as _expr
from .errors import DomainError
from .expr import RateExpr, parse_rate_expr

__all__ = [
    "Model1",
    "Model2",
    "SIR",
    "LinearBDP",
    "Custom",
    "RateModel",
    "birth_rate",
    "death_rate",
    "validate",
    "custom_from_strings",
]


@dataclass(frozen=True)
class Model1:
    """b(x) = lam / x, d(x) = mu."""

    lam: float
    mu: float

    def birth(self, x: float) -> float:
        return self.lam / x

    def death(self, x: float) -> float:
        return self.mu

    def param_violations(self) -> list[str]:
        out = []
        if not self.lam > 0:
            out.append(f"lam must be > 0, got {self.lam}")
        if not self.mu > 0:
            out.append(f"mu must be > 0, got {self.mu}")
        return out

    def to_exprs(self) -> tuple[str, str]:
        return f"{self.lam!r}/x", f"{self.mu!r}"


@dataclass(frozen=True)
class Model2:
    """b(x) = lam * exp(-x / alpha), d(x) = mu."""

    lam: float
    alpha: float
    mu: float

    def birth(self, x: float) -> float:
        return self.lam * math.exp(-x / self.alpha)

    def death(self, x: float) -> float:
        return self.mu

    def param_violations(self) -> list[str]:
        out = []
        if not self.lam > 0:
            out.append(f"lam must be > 0, got {self.lam}")
        if not self.alpha > 0:
            out.append(f"alpha must be > 0, got {self.alpha}")
        if not self.mu > 0:
            out.append(f"mu must be > 0, got {self.mu}")
        return out

    def to_exprs(self) -> tuple[str, str]:
        return f"{self.lam!r}*exp(-x/{self.alpha!r})", f"{self.mu!r}"


@dataclass(frozen=True)
class SIR:
    """Closed-population epidemic: b(x) = beta * (1 - x/n_pop), d(x) = gamma.

    z is the number of infectious individuals, x the cumulative cases; the
    susceptibles are n_pop - x, so b vanishes exactly at x = n_pop.
    """

    beta: float
    gamma: float
    n_pop: int

    def birth(self, x: float) -> float:
        return self.beta * (1.0 - x / self.n_pop)

    def death(self, x: float) -> float:
        return self.gamma

    def param_violations(self) -> list[str]:
        out = []
        if not self.beta > 0:
            out.append(f"beta must be > 0, got {self.beta}")
        if not self.gamma > 0:
            out.append(f"gamma must be > 0, got {self.gamma}")
        if not (isinstance(self.n_pop, int) and self.n_pop >= 1):
            out.append(f"n_pop must be a positive integer, got {self.n_pop}")
        return out

    def to_exprs(self) -> tuple[str, str]:
        return f"{self.beta!r}*(1-x/{float(self.n_pop)!r})", f"{self.gamma!r}"


@dataclass(frozen=True)
class LinearBDP:
    """Constant per-capita rates b and d (the classical linear process).

    d = 0 is accepted at construction time so that pure-birth (Yule)
    processes can be simulated; validate() still reports it, since every
    other operation in the package assumes d > 0.
    """

    b: float
    d: float

    def birth(self, x: float) -> float:
        return self.b

    def death(self, x: float) -> float:
        return self.d

    def param_violations(self) -> list[str]:
        out = []
        if not self.b >= 0:
            out.append(f"b must be >= 0, got {self.b}")
        if not self.d > 0:
            out.append(f"d must be > 0, got {self.d}")
        return out

    def to_exprs(self) -> tuple[str, str]:
        return f"{self.b!r}+0*x", f"{self.d!r}+0*x"


@dataclass(frozen=True)
class Custom:
    """User-defined rates given as expression ASTs over the variable x.

    x_max, if set, declares an upper domain endpoint (like SIR's n_pop).
    Validation probes a geometric grid, so it is best-effort: a finite grid
    cannot prove positivity everywhere.  b may legitimately be zero on part
    of the domain, in which case the process runs as a pure-death process
    while it stays there.
    """

    b_expr: RateExpr
    d_expr: RateExpr
    x_max: float | None = None

    def birth(self, x: float) -> float:
        return _expr.evaluate(self.b_expr, x)

    def death(self, x: float) -> float:
        return _expr.evaluate(self.d_expr, x)

    def param_violations(self) -> list[str]:
        out = []
        for name, node in (("b_expr", self.b_expr), ("d_expr", self.d_expr)):
            strictly_positive = name == "d_expr"
            for x in _probe_grid(self.x_max):
                try:
                    v = _expr.evaluate(node, x)
                except Exception as exc:
                    out.append(f"{name} fails at probe x={x:g}: {exc}")
                    continue
                if strictly_positive and not v > 0:
                    out.append(f"{name} must be > 0, got {v:g} at probe x={x:g}")
                elif not strictly_positive and not v >= 0:
                    out.append(f"{name} must be >= 0, got {v:g} at probe x={x:g}")
        return out

    def to_exprs(self) -> tuple[str, str]:
        return _expr.render(self.b_expr), _expr.render(self.d_expr)


RateModel = Model1 | Model2 | SIR | LinearBDP | Custom


def custom_from_strings(b: str, d: str, x_max: float | None = None) -> Custom:
    """Build a Custom model by parsing both rate expressions."""
    return Custom(parse_rate_expr(b), parse_rate_expr(d), x_max)


def _probe_grid(x_max: float | None) -> list[float]:
    """Geometric probe grid {1, 1.5, 2.25, ...} up to 1e6, plus endpoints."""
    grid = [1.0]
    while grid[-1] * 1.5 < 1e6:
        grid.append(grid[-1] * 1.5)
    grid.append(1e6)
    if x_max is not None:
        grid = [x for x in grid if x <= x_max]
        if not grid or grid[-1] < x_max:
            grid.append(x_max)
    return grid


def domain_max(model: RateModel) -> float:
    """Upper endpoint of the model's x-domain (inf when unbounded)."""
    if isinstance(model, SIR):
        return float(model.n_pop)
    if isinstance(model, Custom) and model.x_max is not None:
        return model.x_max
    return math.inf


def _check_domain(model: RateModel, x: float) -> None:
    if not x >= 1.0:
        raise DomainError(f"x must be >= 1, got {x}")
    hi = domain_max(model)
    if x > hi:
        raise DomainError(f"x must be <= {hi:g} for this model, got {x}")


def birth_rate(model: RateModel, x: float) -> float:
    """Per-individual birth rate b(x); raises DomainError outside [1, x_max]."""
    _check_domain(model, x)
    return model.birth(x)


def death_rate(model: RateModel, x: float) -> float:
    """Per-individual death rate d(x); raises DomainError outside [1, x_max]."""
    _check_domain(model, x)
    return model.death(x)


def validate(model: RateModel) -> list[str]:
    """Return all parameter/positivity violations found (empty if valid).

    Violations are data, not exceptions: constructing an invalid model never
    raises, so configuration errors can be collected and reported together.
    """
    return model.param_violations()

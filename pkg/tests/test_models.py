import math

import numpy as np
import pytest

from progeny.errors import DomainError
from progeny.models import (
    SIR,
    Custom,
    LinearBDP,
    Model1,
    Model2,
    birth_rate,
    custom_from_strings,
    death_rate,
    validate,
)

M1 = Model1(lam=1000.0, mu=1.0)
M2 = Model2(lam=1000.0, alpha=100.0, mu=1.0)
SIR_M = SIR(beta=2.0, gamma=1.0, n_pop=1000)


class TestRates:
    def test_model1(self):
        assert birth_rate(M1, 10.0) == 100.0
        assert death_rate(M1, 500.0) == 1.0

    def test_model2(self):
        assert birth_rate(M2, 100.0) == pytest.approx(1000.0 * math.exp(-1.0), rel=1e-12)
        assert death_rate(M2, 7.0) == 1.0

    def test_sir(self):
        assert birth_rate(SIR_M, 1000.0) == 0.0  # all susceptibles consumed
        assert death_rate(SIR_M, 7.0) == 1.0

    def test_linear(self):
        m = LinearBDP(b=0.0, d=1.0)
        assert birth_rate(m, 3.0) == 0.0
        assert death_rate(m, 3.0) == 1.0

    def test_custom_constant_death(self):
        m = custom_from_strings("1000/x", "2+0*x")
        assert death_rate(m, 3.0) == 2.0

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            birth_rate(M1, 0.5)
        with pytest.raises(DomainError):
            birth_rate(SIR_M, 1001.0)
        with pytest.raises(DomainError):
            death_rate(SIR_M, 1000.5)


class TestValidate:
    def test_valid_model1(self):
        assert validate(M1) == []

    def test_zero_lambda(self):
        violations = validate(Model2(lam=0.0, alpha=100.0, mu=1.0))
        assert len(violations) == 1
        assert "lam" in violations[0]

    def test_custom_nonfinite_probe(self):
        violations = validate(custom_from_strings("log(x-2)", "1"))
        assert any("x=1" in v for v in violations)

    def test_negative_params(self):
        assert validate(Model1(lam=-1.0, mu=1.0))
        assert validate(SIR(beta=2.0, gamma=-1.0, n_pop=1000))
        assert validate(SIR(beta=2.0, gamma=1.0, n_pop=0))

    def test_yule_flagged_but_constructible(self):
        m = LinearBDP(b=1.0, d=0.0)
        assert any("d" in v for v in validate(m))

    def test_custom_negative_birth_probe(self):
        violations = validate(custom_from_strings("1-x", "1"))
        assert any("b_expr" in v for v in violations)


class TestProperties:
    @pytest.mark.parametrize("model", [M1, M2])
    def test_birth_rate_strictly_decreasing(self, model):
        grid = np.geomspace(1.0, 1e6, 1000)
        vals = [birth_rate(model, float(x)) for x in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize(
        "model,hi",
        [(M1, 1e6), (M2, 1e6), (SIR_M, 1000.0), (LinearBDP(b=2.0, d=1.0), 1e6)],
    )
    def test_builtin_matches_equivalent_custom(self, model, hi):
        b_str, d_str = model.to_exprs()
        custom = custom_from_strings(b_str, d_str)
        for x in np.linspace(1.0, hi, 1000):
            x = float(x)
            b_ref, b_cus = birth_rate(model, x), custom.birth(x)
            d_ref, d_cus = death_rate(model, x), custom.death(x)
            assert b_cus == pytest.approx(b_ref, rel=1e-15, abs=1e-300)
            assert d_cus == pytest.approx(d_ref, rel=1e-15)

    def test_custom_domain_cap(self):
        m = custom_from_strings("10/x", "1", x_max=100.0)
        assert birth_rate(m, 100.0) == 0.1
        with pytest.raises(DomainError):
            birth_rate(m, 101.0)

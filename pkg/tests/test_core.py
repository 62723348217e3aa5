import numpy as np
import pytest

from chemfv.core import (
    Grid,
    InitialData,
    ModelParameters,
    ScalarField,
    field_from_csv,
    field_to_csv,
    integrate,
    validate_initial_data,
    validate_parameters,
)
from chemfv.errors import (
    NonnegativityViolation,
    OutOfRange,
    PositivityViolation,
    ZeroMass,
)


def params(**kw):
    base = dict(chi=1.0, r=1.0, mu=1.0, k=0.5, alpha=1.0, beta=1.0, kappa=1)
    base.update(kw)
    return ModelParameters(**base)


class TestValidateParameters:
    def test_accepts_baseline(self):
        p = params()
        assert validate_parameters(p) is p

    def test_rejects_k_equal_one(self):
        with pytest.raises(OutOfRange) as exc:
            validate_parameters(params(k=1.0))
        assert exc.value.field == "k"

    def test_rejects_zero_growth(self):
        with pytest.raises(OutOfRange) as exc:
            validate_parameters(params(r=0.0))
        assert exc.value.field == "r"

    @pytest.mark.parametrize("field,value", [
        ("chi", -1.0), ("mu", 0.0), ("k", 0.0), ("k", 1.5),
        ("alpha", 0.0), ("beta", -2.0), ("kappa", 2),
    ])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(OutOfRange):
            validate_parameters(params(**{field: value}))


class TestGrid:
    def test_rejects_too_few_cells(self):
        with pytest.raises(OutOfRange):
            Grid(2, 8)

    def test_total_area_consistency(self):
        g = Grid(7, 13, 2.5, 0.75)
        assert g.nx * g.ny * g.cell_area == pytest.approx(g.lx * g.ly, rel=1e-15)


class TestValidateInitialData:
    def test_accepts_constants(self):
        g = Grid(4, 4)
        d = InitialData(ScalarField.full(g, 1.0), ScalarField.full(g, 1.0))
        assert validate_initial_data(d, g) is d

    def test_zero_mass_rejected(self):
        g = Grid(4, 4)
        d = InitialData(ScalarField.full(g, 0.0), ScalarField.full(g, 1.0))
        with pytest.raises(ZeroMass):
            validate_initial_data(d, g)

    def test_single_zero_signal_cell_rejected(self):
        g = Grid(4, 4)
        v = np.ones(g.shape)
        v[2, 1] = 0.0
        d = InitialData(ScalarField.full(g, 1.0), ScalarField(v, g))
        with pytest.raises(PositivityViolation):
            validate_initial_data(d, g)

    def test_negative_density_rejected(self):
        g = Grid(4, 4)
        u = np.ones(g.shape)
        u[0, 0] = -0.5
        d = InitialData(ScalarField(u, g), ScalarField.full(g, 1.0))
        with pytest.raises(NonnegativityViolation):
            validate_initial_data(d, g)


class TestIntegrate:
    def test_unit_constant(self):
        g = Grid(5, 9)
        assert integrate(ScalarField.full(g, 1.0)) == pytest.approx(1.0, rel=1e-14)

    def test_constant_times_area(self):
        g = Grid(6, 4, 3.0, 0.5)
        assert integrate(ScalarField.full(g, 2.5)) == pytest.approx(
            2.5 * 3.0 * 0.5, rel=1e-14)

    def test_single_cell_indicator(self):
        g = Grid(4, 4)
        vals = np.zeros(g.shape)
        vals[1, 2] = 1.0
        assert integrate(ScalarField(vals, g)) == pytest.approx(1.0 / 16.0, rel=1e-14)

    def test_linearity(self):
        g = Grid(12, 7, 1.5, 2.0)
        rng = np.random.default_rng(1)
        for _ in range(20):
            f = ScalarField(rng.standard_normal(g.shape), g)
            h = ScalarField(rng.standard_normal(g.shape), g)
            a, b = rng.standard_normal(2)
            combo = ScalarField(a * f.values + b * h.values, g)
            assert integrate(combo) == pytest.approx(
                a * integrate(f) + b * integrate(h), rel=1e-13, abs=1e-13)


class TestFieldRoundTrip:
    def test_csv_exact(self, tmp_path):
        g = Grid(5, 3, 1.25, 0.5)
        rng = np.random.default_rng(7)
        f = ScalarField(rng.standard_normal(g.shape), g)
        path = tmp_path / "f.csv"
        field_to_csv(f, path)
        back = field_from_csv(path)
        assert back.grid == g
        assert np.array_equal(back.values, f.values)

    def test_rejects_nonfinite(self):
        g = Grid(3, 3)
        vals = np.ones(g.shape)
        vals[1, 1] = np.nan
        with pytest.raises(ValueError):
            ScalarField(vals, g)

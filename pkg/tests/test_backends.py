import numpy as np
import pytest

from chemfv import backends
from chemfv.backends import reference

compiled = pytest.importorskip("chemfv.backends._kernels")


@pytest.fixture
def fields():
    rng = np.random.default_rng(42)
    ny, nx = 23, 31
    u = rng.random((ny, nx)) + 0.1
    v = rng.random((ny, nx)) + 0.3
    return u, v, 1.0 / nx, 1.0 / ny


class TestKernelAgreement:
    def test_laplacian(self, fields):
        u, _, hx, hy = fields
        a = reference.laplacian(u, hx, hy)
        b = compiled.laplacian(u, hx, hy)
        assert np.allclose(a, b, rtol=0, atol=1e-12 * np.abs(a).max())

    def test_gradient_squared(self, fields):
        _, v, hx, hy = fields
        a = reference.gradient_squared(v, hx, hy)
        b = compiled.gradient_squared(v, hx, hy)
        assert np.allclose(a, b, rtol=0, atol=1e-12 * np.abs(a).max())

    def test_chem_flux(self, fields):
        u, v, hx, hy = fields
        ax, ay, amx, amy = reference.chem_flux(u, v, 2.0, 0.5, hx, hy)
        bx, by, bmx, bmy = compiled.chem_flux(u, v, 2.0, 0.5, hx, hy)
        assert np.allclose(ax, bx, rtol=0, atol=1e-13 * np.abs(ax).max())
        assert np.allclose(ay, by, rtol=0, atol=1e-13 * np.abs(ay).max())
        assert amx == pytest.approx(bmx, rel=1e-13)
        assert amy == pytest.approx(bmy, rel=1e-13)

    def test_flux_divergence(self, fields):
        u, v, hx, hy = fields
        fx, fy, _, _ = reference.chem_flux(u, v, 2.0, 0.5, hx, hy)
        a = reference.flux_divergence(fx, fy, hx, hy)
        b = compiled.flux_divergence(fx, fy, hx, hy)
        assert np.allclose(a, b, rtol=0, atol=1e-12 * np.abs(a).max())

    def test_cg_helmholtz(self, fields):
        u, _, hx, hy = fields
        x0 = np.zeros_like(u)
        xa, ita, ra = reference.cg_helmholtz(3.0, u, x0, 1e-10, 1000, hx, hy)
        xb, itb, rb = compiled.cg_helmholtz(3.0, u, x0.copy(), 1e-10, 1000,
                                            hx, hy)
        # same Krylov recurrence, so iterates track to rounding error
        assert np.allclose(xa, xb, rtol=0, atol=1e-10 * np.abs(xa).max())
        assert abs(ita - itb) <= 1
        assert ra <= 1e-10 and rb <= 1e-10


class TestSelection:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("CHEMFV_BACKEND", "reference")
        assert backends.get_backend().NAME == "reference"
        monkeypatch.setenv("CHEMFV_BACKEND", "compiled")
        assert backends.get_backend().NAME == "compiled"

    def test_explicit_name_beats_env(self, monkeypatch):
        monkeypatch.setenv("CHEMFV_BACKEND", "compiled")
        assert backends.get_backend("reference").NAME == "reference"

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            backends.get_backend("fortran")

    def test_default_prefers_compiled(self, monkeypatch):
        monkeypatch.delenv("CHEMFV_BACKEND", raising=False)
        assert backends.get_backend().NAME == "compiled"


class TestEndToEndAgreement:
    def test_run_results_close_across_backends(self):
        from chemfv.core import Grid, InitialData, ModelParameters, ScalarField
        from chemfv.stepping import StepControl, run

        g = Grid(24, 24)
        p = ModelParameters(chi=3.0, r=1.0, mu=1.0, k=0.5, alpha=1.0, beta=1.0)
        u = ScalarField.from_function(
            g, lambda x, y: 5.0 * np.exp(-30 * ((x - 0.5) ** 2 + (y - 0.5) ** 2)))
        init = InitialData(u, ScalarField.full(g, 0.1))
        control = StepControl(t_end=0.2, blowup_threshold=1e30)
        finals = {}
        for name in ("reference", "compiled"):
            summary = run(init, p, control, backend=backends.get_backend(name))
            finals[name] = summary.outcome.state.u.values
        scale = np.abs(finals["reference"]).max()
        assert np.allclose(finals["reference"], finals["compiled"],
                           rtol=0, atol=1e-9 * scale)

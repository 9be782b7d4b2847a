import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.special import logit

from hopfsoliton import _backend

py = _backend.python_kernels
compiled = _backend.compiled_kernels
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def bump_theta(n, L=20.0):
    x = np.linspace(-L, L, n)
    k = 1 / (1 + np.exp(-x))
    return x, logit(k) + 0.8 * np.exp(-0.25 * x * x)


class TestPythonKernels:
    def test_laplacian_quadratic(self):
        x = np.linspace(-1, 1, 41)
        h = x[1] - x[0]
        # exact for quadratics, including the ghost rows
        out = py.laplacian_neumann(x * x, h, -2.0, 2.0)
        np.testing.assert_allclose(out, 2.0, rtol=1e-10)

    def test_thomas(self, rng):
        n = 50
        lower, upper = rng.normal(size=n - 1), rng.normal(size=n - 1)
        diag = 5 + np.abs(rng.normal(size=n))
        A = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
        rhs = rng.normal(size=n)
        np.testing.assert_allclose(py.thomas(lower, diag, upper, rhs), np.linalg.solve(A, rhs), atol=1e-12)

    def test_be_residual(self):
        x, theta = bump_theta(401)
        h = x[1] - x[0]
        new, iters, ok, resid = py.be_solve(theta, 0.05, h, 1.0, 1.0, 1e-12, 1e-13, 25)
        assert ok and resid < 1e-12 and iters >= 1
        k = 1 / (1 + np.exp(-new))
        G = k * (1 - k) * (new - theta) - 0.05 * py.laplacian_neumann(new, h, 1.0, 1.0)
        assert np.max(np.abs(G)) < 1e-12

    def test_be_fixed_point(self):
        x = np.linspace(-20, 20, 401)
        new, iters, ok, _ = py.be_solve(x.copy(), 1.0, x[1] - x[0], 1.0, 1.0, 1e-12, 1e-13, 25)
        # linspace rounding leaves a residual of a few ulps, one iteration at most
        assert ok and iters <= 1
        np.testing.assert_allclose(new, x, rtol=0, atol=1e-12)


@needs_compiled
class TestParity:
    def test_laplacian(self, rng):
        theta = rng.normal(size=301)
        np.testing.assert_allclose(
            compiled.laplacian_neumann(theta, 0.1, 2.0, 1.0), py.laplacian_neumann(theta, 0.1, 2.0, 1.0), rtol=1e-13, atol=1e-11
        )

    def test_thomas(self, rng):
        n = 200
        lower, upper = rng.normal(size=n - 1), rng.normal(size=n - 1)
        diag = 5 + np.abs(rng.normal(size=n))
        rhs = rng.normal(size=n)
        np.testing.assert_allclose(
            compiled.thomas(lower, diag.copy(), upper, rhs), py.thomas(lower, diag.copy(), upper, rhs), atol=1e-12
        )

    @pytest.mark.parametrize("n,dt", [(201, 1e-3), (2001, 0.1), (4001, 1.0)])
    def test_be_solve(self, n, dt):
        x, theta = bump_theta(n)
        h = x[1] - x[0]
        a = compiled.be_solve(theta, dt, h, 1.0, 1.0, 1e-12, 1e-13, 25)
        b = py.be_solve(theta, dt, h, 1.0, 1.0, 1e-12, 1e-13, 25)
        assert a[2] and b[2]
        np.testing.assert_allclose(a[0], b[0], rtol=0, atol=1e-9)


class TestSelection:
    def test_backend_name(self):
        assert _backend.BACKEND in ("cython", "python")
        if compiled is not None:
            assert _backend.BACKEND == "cython"

    def test_env_forces_fallback(self):
        env = dict(os.environ, HOPFSOLITON_BACKEND="python")
        out = subprocess.run(
            [sys.executable, "-c", "import hopfsoliton; print(hopfsoliton.BACKEND)"],
            env=env, capture_output=True, text=True, check=True,
        )
        assert out.stdout.strip() == "python"

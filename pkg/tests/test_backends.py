"""The compiled kernels and the pure-Python fallback must agree."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from hackint import _backend, _pykernels

try:
    from hackint import _ckernels
except ImportError:  # pragma: no cover - exercised only without a compiler
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


@needs_c
def test_nw_kernels_agree():
    rng = np.random.default_rng(0)
    z, y = rng.normal(size=(40, 3)), rng.normal(size=40)
    a = _pykernels.nw_loo_predictions(z, y, 0.8)
    b = _ckernels.nw_loo_predictions(z, y, 0.8)
    assert np.max(np.abs(a[0] - b[0])) < 1e-12
    assert a[1] == pytest.approx(b[1], rel=1e-12)
    q = rng.normal(size=3)
    assert _pykernels.nw_predict(z, y, q, 0.8)[0] == pytest.approx(_ckernels.nw_predict(z, y, q, 0.8)[0], abs=1e-12)


@needs_c
def test_smo_agrees():
    rng = np.random.default_rng(1)
    n = 30
    x = rng.normal(size=(n, 2))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    q = (y[:, None] * y[None, :]) * (x @ x.T)
    p = -np.ones(n) - 0.3 * y * (x @ np.array([0.5, -0.2]))
    a0 = np.zeros(n)
    a0[np.flatnonzero(y > 0)[0]] = 0.3  # feasible start with y'a = 0.3
    ra = _pykernels.smo_solve(q, p, y, 1.0, 0.3, a0.copy())
    rb = _ckernels.smo_solve(q, p, y, 1.0, 0.3, a0.copy())
    assert ra[3] and rb[3]
    obj = lambda a: 0.5 * a @ q @ a + p @ a  # noqa: E731
    assert obj(ra[0]) == pytest.approx(obj(rb[0]), abs=1e-9)
    assert ra[0] @ y == pytest.approx(0.3, abs=1e-12)
    assert rb[0] @ y == pytest.approx(0.3, abs=1e-12)


def test_fallback_selected_by_env():
    code = "import hackint._backend as b; print(b.BACKEND)"
    env = dict(os.environ, HACKINT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_exports():
    assert _backend.BACKEND in ("cython", "python")
    assert callable(_backend.smo_solve) and callable(_backend.nw_predict)

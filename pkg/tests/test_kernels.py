"""The two kernel backends must be interchangeable."""

import numpy as np
import pytest

from riskrank import _kernels
from riskrank._kernels import _fallback

_core = pytest.importorskip(
    "riskrank._kernels._core", reason="compiled backend not built"
)


def random_csc(rng, n_rows, n_cols, density=0.4):
    dense = rng.normal(size=(n_rows, n_cols))
    dense[rng.random(size=dense.shape) > density] = 0.0
    indptr = [0]
    indices, data = [], []
    for j in range(n_cols):
        nz = np.nonzero(dense[:, j])[0]
        indices.extend(nz)
        data.extend(dense[nz, j])
        indptr.append(len(indices))
    return (
        np.asarray(indptr, dtype=np.int64),
        np.asarray(indices, dtype=np.int64),
        np.asarray(data, dtype=np.float64),
        dense,
    )


def test_backend_flag_is_reported():
    assert _kernels.BACKEND in ("compiled", "python")


def test_matvec_backends_agree():
    rng = np.random.default_rng(21)
    for _ in range(50):
        n_rows = int(rng.integers(1, 20))
        n_cols = int(rng.integers(1, 20))
        indptr, indices, data, dense = random_csc(rng, n_rows, n_cols)
        x = rng.normal(size=n_cols)
        got_c = _core.csc_matvec(n_rows, indptr, indices, data, x)
        got_py = _fallback.csc_matvec(n_rows, indptr, indices, data, x)
        np.testing.assert_allclose(got_c, got_py, rtol=0, atol=1e-13)
        np.testing.assert_allclose(got_c, dense @ x, rtol=0, atol=1e-12)


def test_dtw_backends_agree_exactly():
    rng = np.random.default_rng(22)
    for _ in range(200):
        a = rng.normal(size=int(rng.integers(1, 12)))
        b = rng.normal(size=int(rng.integers(1, 12)))
        assert _core.dtw_cost(a, b) == _fallback.dtw_cost(a, b)
        np.testing.assert_array_equal(_core.dtw_table(a, b), _fallback.dtw_table(a, b))


def test_env_override_forces_python(monkeypatch):
    import importlib
    import os
    import riskrank._kernels as kernels

    original = os.environ.get("RISKRANK_PURE_PYTHON")
    monkeypatch.setenv("RISKRANK_PURE_PYTHON", "1")
    reloaded = importlib.reload(kernels)
    try:
        assert reloaded.BACKEND == "python"
        assert reloaded.csc_matvec is _fallback.csc_matvec
    finally:
        # put the session's own backend choice back, whatever it was
        if original is None:
            monkeypatch.delenv("RISKRANK_PURE_PYTHON")
        else:
            monkeypatch.setenv("RISKRANK_PURE_PYTHON", original)
        importlib.reload(kernels)

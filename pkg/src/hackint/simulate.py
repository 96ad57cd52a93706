"""Synthetic data generators for the worked illustrations.

Each generator is deterministic given its seed and returns plain arrays or
:class:`~hackint.data.Dataset` objects ready for the interval functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

TRUE_ATE = 2.0
SVM_FIGURE_SEED = 23
KERNEL_THETA = 2000.0


def monomials(v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Observed monomial features of the two latent covariates."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    return np.column_stack([v1, v2, v1**2, v2**2, v1 * v2, v1 * v2**2, v1**2 * v2, v1**2 * v2**2])


MONOMIAL_NAMES = ["v1", "v2", "v1^2", "v2^2", "v1*v2", "v1*v2^2", "v1^2*v2", "v1^2*v2^2"]


def scenario1(seed: int, n: int = 500) -> Dataset:
    """Constant-effect treatment data observed through monomial features.

    ``v ~ U[1, 5]^2``, treatment with probability 1/2 and
    ``y = 2 w + v1 + v2 + N(0, 1)``.
    """
    rng = np.random.default_rng(seed)
    v = rng.uniform(1.0, 5.0, size=(n, 2))
    w = (rng.random(n) < 0.5).astype(float)
    y = TRUE_ATE * w + v[:, 0] + v[:, 1] + rng.normal(size=n)
    return Dataset(monomials(v[:, 0], v[:, 1]), y, w, names=list(MONOMIAL_NAMES))


def scenario2(seed: int, n: int = 500, v_new: tuple[float, float] = (3.0, 2.0)) -> tuple[Dataset, Dataset, np.ndarray]:
    """Treated and control arms of :func:`scenario1` plus the query features at ``v_new``."""
    data = scenario1(seed, n)
    treated, control = data.split_by_treatment()
    return treated, control, monomials([v_new[0]], [v_new[1]])[0]


@dataclass
class SvmLayout:
    x: np.ndarray
    y: np.ndarray
    x_new: np.ndarray
    psi_d: float = 1.0
    rel_tolerance: float = 0.05


def svm_layout(seed: int = SVM_FIGURE_SEED, n: int = 40) -> SvmLayout:
    """Two overlapping Gaussian classes along the diagonal with a query on the positive side.

    Interval widths vary noticeably across seeds; the default seed is the
    layout used for the figure regeneration.
    """
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) < n // 2, 1.0, -1.0)
    x = rng.normal(size=(n, 2)) + 2.0 * y[:, None] * np.array([1.0, 1.0]) / np.sqrt(2.0)
    return SvmLayout(x, y, np.array([0.5, 0.5]))


@dataclass
class KernelLayout:
    x: np.ndarray
    y: np.ndarray
    x_new: np.ndarray
    psi_d: float
    theta: float
    noise_scale: float


def kernel_layout(
    seed: int,
    n: int = 200,
    theta: float = KERNEL_THETA,
    psi_d: float = 1.0,
    fill: float = 0.97,
) -> KernelLayout:
    """Covariates on ``[0, 10]^2`` with mean outcome constant along slope-one lines.

    ``y = sin((x1 - x2) / 2) + sigma * e``. The noise scale ``sigma`` is set
    so that the leave-one-out loss at the reference metric ``A = diag(1, 1)``
    projected onto the ``x1 - x2`` direction equals ``fill * theta``; without
    this calibration the slack under a fixed ``theta`` swings widely between
    draws and so does the interval width.
    """
    from . import _backend

    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 10.0, size=(n, 2))
    signal = np.sin((x[:, 0] - x[:, 1]) / 2.0)
    e = rng.normal(size=n)
    a_ref = np.array([[1.0, -1.0], [0.0, 0.0]]) / np.sqrt(2.0)
    z = x @ a_ref.T
    # the leave-one-out predictor is linear in y for a fixed metric
    r_sig = signal - _backend.nw_loo_predictions(z, signal, psi_d)[0]
    r_eps = e - _backend.nw_loo_predictions(z, e, psi_d)[0]
    qa, qb, qc = r_eps @ r_eps, 2.0 * (r_sig @ r_eps), r_sig @ r_sig - fill * theta
    sigma = (-qb + np.sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa)
    return KernelLayout(x, signal + sigma * e, np.array([5.0, 5.0]), psi_d, theta, float(sigma))

"""Closed-form tethered hacking intervals for least-squares models.

All intervals here are over the set ``{beta : ||y - X beta||^2 <= theta}``,
an ellipsoid centred at the least-squares solution, so the extremes of any
linear statistic ``c . beta`` are ``c . beta_ls +/- sqrt(theta - SSE) *
sqrt(c G^{-1} c)`` with ``G = X^T X``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .data import Dataset
from .errors import DataError, DimensionMismatch, MissingTreatment, SingularGram
from .interval import HackingInterval, check_theta

RCOND_THRESHOLD = 1e-12


@dataclass
class OlsFit:
    """Least-squares fit, optionally with a treatment column appended last.

    Attributes
    ----------
    beta_ls : ndarray
        Coefficients on the covariates in the full fit.
    beta0_ls : float or None
        Treatment coefficient when the fit includes treatment.
    sse : float
        Minimum squared-error loss.
    gram_inv : ndarray
        Inverse Gram matrix of the fitted design (treatment last if present).
    v_tt : float or None
        Treatment diagonal of ``gram_inv``.
    gamma_ls : ndarray or None
        Coefficients of treatment regressed on the covariates.
    beta_x_only : ndarray or None
        Coefficients of the outcome regressed on the covariates alone.
    design, y : ndarray
        Fitted design and outcome, kept so losses can be replayed.
    """

    beta_ls: np.ndarray
    sse: float
    gram_inv: np.ndarray
    n: int
    p: int
    design: np.ndarray
    y: np.ndarray
    r_factor: np.ndarray
    beta0_ls: float | None = None
    v_tt: float | None = None
    gamma_ls: np.ndarray | None = None
    beta_x_only: np.ndarray | None = None

    @property
    def has_treatment(self) -> bool:
        return self.beta0_ls is not None

    @property
    def coef(self) -> np.ndarray:
        """Full coefficient vector matching ``design`` columns."""
        if self.has_treatment:
            return np.append(self.beta_ls, self.beta0_ls)
        return self.beta_ls.copy()

    @property
    def dof(self) -> int:
        """Residual degrees of freedom ``n - p - 1`` (p counts covariates only)."""
        return self.n - self.p - 1

    def loss(self, coef: np.ndarray) -> float:
        r = self.y - self.design @ np.asarray(coef, dtype=float)
        return float(r @ r)

    def quad_form(self, c: np.ndarray) -> float:
        """``c G^{-1} c`` computed through the triangular factor."""
        z = sla.solve_triangular(self.r_factor, np.asarray(c, dtype=float), trans="T")
        return float(z @ z)


def _lstsq_qr(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(a, mode="reduced")
    s = np.linalg.svd(r, compute_uv=False)
    rcond = (s[-1] / s[0]) ** 2 if s[0] > 0 else 0.0
    if not rcond >= RCOND_THRESHOLD:
        raise SingularGram(f"Gram matrix is numerically singular (reciprocal condition {rcond:.3g})")
    coef = sla.solve_triangular(r, q.T @ b)
    return coef, r


def fit_ols(data: Dataset, include_treatment: bool = False) -> OlsFit:
    """Ordinary least squares via a QR factorization.

    No intercept is added; include a column of ones in ``data.x`` if needed.
    """
    x, y = data.x, data.y
    n, p = x.shape
    if include_treatment:
        if data.w is None:
            raise MissingTreatment("include_treatment requested but dataset has no treatment column")
        design = np.column_stack([x, data.w])
    else:
        design = x
    if n <= design.shape[1]:
        raise DimensionMismatch(f"need more rows than fitted columns, got n={n}, columns={design.shape[1]}")
    coef, r = _lstsq_qr(design, y)
    resid = y - design @ coef
    sse = float(resid @ resid)
    r_inv = sla.solve_triangular(r, np.eye(r.shape[0]))
    gram_inv = r_inv @ r_inv.T
    gram_inv = 0.5 * (gram_inv + gram_inv.T)
    fit = OlsFit(
        beta_ls=coef[:p].copy(),
        sse=sse,
        gram_inv=gram_inv,
        n=n,
        p=p,
        design=design,
        y=y,
        r_factor=r,
    )
    if include_treatment:
        fit.beta0_ls = float(coef[p])
        fit.v_tt = float(gram_inv[p, p])
        fit.gamma_ls, _ = _lstsq_qr(x, data.w)
        fit.beta_x_only, _ = _lstsq_qr(x, y)
    return fit


def ate_interval(fit: OlsFit, theta: float) -> HackingInterval:
    """Range of the treatment coefficient over least-squares models with loss <= theta.

    Witnesses are ``(beta_x_only - b0 * gamma_ls, b0)`` for each endpoint ``b0``.
    """
    if not fit.has_treatment:
        raise MissingTreatment("ATE interval needs a fit that includes the treatment column")
    theta = check_theta(theta, fit.sse)
    half = np.sqrt(fit.v_tt) * np.sqrt(theta - fit.sse)
    lo, hi = fit.beta0_ls - half, fit.beta0_ls + half

    def witness(b0: float) -> np.ndarray:
        return np.append(fit.beta_x_only - b0 * fit.gamma_ls, b0)

    return HackingInterval(
        lower=lo,
        upper=hi,
        stat_at_min_loss=fit.beta0_ls,
        theta=theta,
        witness_lower=witness(lo),
        witness_upper=witness(hi),
        info={"kind": "ate", "half_width": half, "sse": fit.sse, "v_tt": fit.v_tt},
    )


def linear_stat_interval(fit: OlsFit, c: np.ndarray, theta: float) -> HackingInterval:
    """Range of ``c . coef`` over models with loss <= theta (``c`` spans all fitted columns)."""
    c = np.asarray(c, dtype=float).ravel()
    if c.shape[0] != fit.design.shape[1]:
        raise DimensionMismatch(f"statistic vector has length {c.shape[0]}, expected {fit.design.shape[1]}")
    theta = check_theta(theta, fit.sse)
    coef = fit.coef
    centre = float(c @ coef)
    q = fit.quad_form(c)
    slack = np.sqrt(theta - fit.sse)
    half = slack * np.sqrt(q)
    if q > 0:
        # G^{-1} c scaled so the loss increase is exactly theta - SSE
        upsilon = fit.gram_inv @ c
        step = upsilon * (slack / np.sqrt(q))
        a, b = coef + step, coef - step
        # label by value rather than by branch sign
        if c @ a < c @ b:
            a, b = b, a
    else:
        a = b = coef
    return HackingInterval(
        lower=centre - half,
        upper=centre + half,
        stat_at_min_loss=centre,
        theta=theta,
        witness_lower=b,
        witness_upper=a,
        info={"half_width": half, "sse": fit.sse, "quad_form": q},
    )


def prediction_interval(fit: OlsFit, x_new: np.ndarray, theta: float) -> HackingInterval:
    """Range of the prediction ``x_new . beta`` over models with loss <= theta."""
    x_new = np.asarray(x_new, dtype=float).ravel()
    if fit.has_treatment:
        raise DimensionMismatch("prediction intervals expect a covariate-only fit")
    if x_new.shape[0] != fit.p:
        raise DimensionMismatch(f"x_new has length {x_new.shape[0]}, expected {fit.p}")
    out = linear_stat_interval(fit, x_new, theta)
    out.info["kind"] = "prediction"
    return out


class ArmError(DataError):
    """Wraps a per-arm failure in an ITE computation, naming the arm."""

    def __init__(self, arm: str, cause: Exception):
        super().__init__(f"{arm} arm: {cause}")
        self.arm = arm
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", self.exit_code)


def ite_interval(
    treated: Dataset,
    control: Dataset,
    x_new: np.ndarray,
    theta_t: float,
    theta_c: float,
) -> HackingInterval:
    """Individual treatment effect interval from separately tethered arm regressions."""
    arms = {}
    for arm, data, theta in (("treated", treated, theta_t), ("control", control, theta_c)):
        try:
            arms[arm] = prediction_interval(fit_ols(data), x_new, theta)
        except DataError as exc:
            raise ArmError(arm, exc) from exc
        except Exception as exc:
            if hasattr(exc, "exit_code"):
                raise type(exc)(f"{arm} arm: {exc}") from exc
            raise
    t, c = arms["treated"], arms["control"]
    p = treated.p
    return HackingInterval(
        lower=t.lower - c.upper,
        upper=t.upper - c.lower,
        stat_at_min_loss=t.stat_at_min_loss - c.stat_at_min_loss,
        theta=theta_t + theta_c,
        # treated coefficients followed by control coefficients
        witness_lower=np.concatenate([t.witness_lower, c.witness_upper]),
        witness_upper=np.concatenate([t.witness_upper, c.witness_lower]),
        info={
            "kind": "ite",
            "layout": {"treated": [0, p], "control": [p, 2 * p]},
            "treated": t.to_dict(),
            "control": c.to_dict(),
            "theta_t": float(theta_t),
            "theta_c": float(theta_c),
        },
    )

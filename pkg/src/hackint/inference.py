"""Loss-budget policies and bridges to classical inference.

Covers turning a tolerance, a significance level or a sign-flip condition
into a numeric loss budget, checking the equivalence between tethered
intervals and textbook t-intervals, the sampling variance of the ATE
interval bounds, the profile-likelihood threshold conversion and the
generalization bound for hacked data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .data import Dataset
from .distributions import chi2_ppf, two_sided_t
from .errors import (
    DataError,
    DegreesOfFreedomNonpositive,
    DimensionMismatch,
    InvalidAlpha,
    MissingFitContext,
    NegativeSqrtArgument,
)
from .interval import HackingInterval
from .regression import OlsFit, _lstsq_qr, ate_interval, fit_ols, prediction_interval


class Policy(str, Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"
    CLASSICAL_ALPHA = "alpha"
    SIGN_FLIP = "sign_flip"


@dataclass(frozen=True)
class LossBudget:
    """Declarative loss-budget policy; use the class constructors."""

    policy: Policy
    value: float | None = None

    def __post_init__(self):
        if self.policy is Policy.ABSOLUTE and (self.value is None or not math.isfinite(self.value)):
            raise DataError("absolute budget needs a finite theta")
        if self.policy is Policy.RELATIVE and (self.value is None or not self.value >= 0):
            raise DataError(f"relative tolerance must be >= 0, got {self.value}")
        if self.policy is Policy.CLASSICAL_ALPHA and (self.value is None or not 0.0 < self.value < 1.0):
            raise InvalidAlpha(f"alpha must lie strictly in (0, 1), got {self.value}")

    @classmethod
    def absolute(cls, theta: float) -> "LossBudget":
        return cls(Policy.ABSOLUTE, float(theta))

    @classmethod
    def relative(cls, r: float) -> "LossBudget":
        return cls(Policy.RELATIVE, float(r))

    @classmethod
    def classical(cls, alpha: float) -> "LossBudget":
        return cls(Policy.CLASSICAL_ALPHA, float(alpha))

    @classmethod
    def sign_flip(cls) -> "LossBudget":
        return cls(Policy.SIGN_FLIP)


def _require_dof(fit: OlsFit | None, what: str) -> OlsFit:
    if fit is None:
        raise MissingFitContext(f"{what} budget needs a least-squares fit")
    if fit.dof < 1:
        raise DegreesOfFreedomNonpositive(f"n - p - 1 = {fit.dof} must be at least 1")
    return fit


def classical_theta(sse: float, alpha: float, dof: int) -> float:
    """Budget whose tethered interval equals the two-sided ``1 - alpha`` t-interval."""
    if dof < 1:
        raise DegreesOfFreedomNonpositive(f"n - p - 1 = {dof} must be at least 1")
    t = two_sided_t(alpha, dof)
    return sse * (1.0 + t * t / dof)


def resolve_theta(budget: LossBudget, min_loss: float, fit_context: OlsFit | None = None) -> float:
    """Turn a :class:`LossBudget` into a numeric loss threshold."""
    if not min_loss >= 0:
        raise DataError(f"minimum loss must be nonnegative, got {min_loss}")
    if budget.policy is Policy.ABSOLUTE:
        return float(budget.value)
    if budget.policy is Policy.RELATIVE:
        return (1.0 + budget.value) * min_loss
    if budget.policy is Policy.CLASSICAL_ALPHA:
        fit = _require_dof(fit_context, "classical-alpha")
        return classical_theta(min_loss, budget.value, fit.dof)
    fit = _require_dof(fit_context, "sign-flip")
    if not fit.has_treatment:
        raise MissingFitContext("sign-flip budget needs a fit that includes treatment")
    return fit.beta0_ls**2 / fit.v_tt + min_loss


@dataclass
class EquivalenceReport:
    hacking: HackingInterval
    classical: tuple[float, float]
    max_abs_gap: float
    theta: float

    def to_dict(self) -> dict:
        return {
            "hacking": self.hacking.to_dict(),
            "classical": [float(self.classical[0]), float(self.classical[1])],
            "max_abs_gap": float(self.max_abs_gap),
            "theta": float(self.theta),
        }


def classical_ci_equivalence_check(
    fit: OlsFit, alpha: float, kind: str = "ate", x_new: np.ndarray | None = None
) -> EquivalenceReport:
    """Compare the hacking interval at the converted budget with the t-interval.

    ``kind`` is ``"ate"`` (treatment coefficient) or ``"prediction"``. Both use
    ``n - p - 1`` residual degrees of freedom with ``p`` counting covariates.
    """
    fit = _require_dof(fit, "classical-alpha")
    theta = classical_theta(fit.sse, alpha, fit.dof)
    t = two_sided_t(alpha, fit.dof)
    s2 = fit.sse / fit.dof
    if kind == "ate":
        if not fit.has_treatment:
            raise MissingFitContext("ATE equivalence needs a fit that includes treatment")
        hack = ate_interval(fit, theta)
        centre, se = fit.beta0_ls, math.sqrt(s2 * fit.v_tt)
    elif kind == "prediction":
        if x_new is None:
            raise DimensionMismatch("prediction equivalence needs x_new")
        hack = prediction_interval(fit, x_new, theta)
        x_new = np.asarray(x_new, dtype=float).ravel()
        centre, se = float(x_new @ fit.beta_ls), math.sqrt(s2 * fit.quad_form(x_new))
    else:
        raise DataError(f"unknown kind {kind!r}; expected 'ate' or 'prediction'")
    classical = (centre - t * se, centre + t * se)
    gap = max(abs(hack.lower - classical[0]), abs(hack.upper - classical[1]))
    return EquivalenceReport(hack, classical, gap, theta)


def chi_mean(dof: int) -> float:
    """Mean of a chi distribution with ``dof`` degrees of freedom."""
    return math.sqrt(2.0) * math.exp(math.lgamma(0.5 * (dof + 1)) - math.lgamma(0.5 * dof))


def ate_bound_variance(sigma2: float, v_tt: float, r: float, n: int, p: int) -> float:
    """Sampling variance shared by both ATE bounds when ``theta = (1 + r) SSE``."""
    dof = n - p - 1
    if dof < 1:
        raise DegreesOfFreedomNonpositive(f"n - p - 1 = {dof} must be at least 1")
    if sigma2 <= 0 or v_tt <= 0 or r < 0:
        raise DataError("need sigma2 > 0, v_tt > 0 and r >= 0")
    mu = chi_mean(dof)
    return sigma2 * v_tt * (1.0 + r * (dof - mu * mu))


@dataclass(frozen=True)
class ProfileSpec:
    log_lp_max: float
    m: int
    alpha: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DataError(f"m must be a positive integer, got {self.m}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidAlpha(f"alpha must lie strictly in (0, 1), got {self.alpha}")


def profile_theta(spec: ProfileSpec) -> float:
    """Log-likelihood cutoff of the ``1 - alpha`` profile-likelihood region."""
    return spec.log_lp_max - 0.5 * chi2_ppf(1.0 - spec.alpha, spec.m)


def loss_threshold_from_profile(theta_p: float) -> float:
    """Negative-log-likelihood budget matching a profile cutoff."""
    return -theta_p


def gaussian_profile_loglik(data: Dataset, sigma2: float, lam: float) -> float:
    """Profile log-likelihood of the treatment coefficient with known noise variance."""
    coef, _ = _lstsq_qr(data.x, data.y - lam * data.w)
    r = data.y - lam * data.w - data.x @ coef
    n = data.n
    return -0.5 * n * math.log(2.0 * math.pi * sigma2) - 0.5 * float(r @ r) / sigma2


def gaussian_profile_interval(data: Dataset, sigma2: float, alpha: float) -> tuple[float, float]:
    """Profile-likelihood interval for the treatment coefficient, found by root finding."""
    if data.w is None:
        raise MissingFitContext("profile interval needs a treatment column")
    fit = fit_ols(data, include_treatment=True)
    lam_hat = fit.beta0_ls
    log_max = gaussian_profile_loglik(data, sigma2, lam_hat)
    cut = profile_theta(ProfileSpec(log_max, 1, alpha))

    def excess(lam: float) -> float:
        return gaussian_profile_loglik(data, sigma2, lam) - cut

    scale = math.sqrt(sigma2 * fit.v_tt) + 1e-12 * (1.0 + abs(lam_hat))
    ends = []
    for direction in (-1.0, 1.0):
        step = scale
        while excess(lam_hat + direction * step) > 0:
            step *= 2.0
        a, b = sorted((lam_hat, lam_hat + direction * step))
        ends.append(brentq(excess, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500))
    return ends[0], ends[1]


def profile_bridge_check(data: Dataset, sigma2: float, alpha: float) -> dict:
    """Tethered ATE interval at ``SSE + sigma2 chi2`` against the profile-likelihood interval."""
    fit = fit_ols(data, include_treatment=True)
    theta = fit.sse + sigma2 * chi2_ppf(1.0 - alpha, 1)
    hack = ate_interval(fit, theta)
    prof = gaussian_profile_interval(data, sigma2, alpha)
    gap = max(abs(hack.lower - prof[0]), abs(hack.upper - prof[1]))
    return {"hacking": hack, "profile": prof, "max_abs_gap": gap, "theta": theta}


@dataclass(frozen=True)
class GenBoundInput:
    h: int
    n: int
    delta: float
    theta1: float = 0.0
    theta2: float = 0.0
    theta3: float = 0.0
    theta4: float = 0.0

    def __post_init__(self):
        if self.h < 1 or self.n < 1:
            raise DataError("h and n must be positive integers")
        if not 0.0 < self.delta < 1.0:
            raise InvalidAlpha(f"delta must lie strictly in (0, 1), got {self.delta}")
        for t in (self.theta1, self.theta2, self.theta3, self.theta4):
            if not (math.isfinite(t) and t >= 0):
                raise DataError(f"theta terms must be finite and nonnegative, got {t}")


def generalization_bound(inp: GenBoundInput, alternate: bool = False) -> float:
    """Generalization bound for a model selected after hacking.

    By default the complexity term is ``h log(2 e h / n)``. With
    ``alternate=True`` the usual Sauer-Shelah form ``h log(2 e n / h)`` is
    used instead; that variant is not the default and must be requested.
    """
    ratio = inp.n / inp.h if alternate else inp.h / inp.n
    arg = inp.h * math.log(2.0 * math.e * ratio) + math.log(4.0 / inp.delta)
    if arg < 0:
        raise NegativeSqrtArgument(
            f"h*log(2e*{'n/h' if alternate else 'h/n'}) + log(4/delta) = {arg:.6g} is negative"
        )
    return 2.0 * math.sqrt(2.0 * arg / inp.n) + inp.theta1 + inp.theta2 + inp.theta3 + inp.theta4

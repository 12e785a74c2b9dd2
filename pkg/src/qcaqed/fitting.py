"""Fits for the decay of ``lambda_min(M)`` and the shape of its eigenvector.

Two estimators follow the scikit-learn ``fit``/``predict`` protocol and two
functional wrappers return a plain :class:`FitResult` that serialises to JSON.
Eigenvector indices are 0-based, so the centre of a length ``M+1`` profile is
``M/2``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np
from scipy.signal import find_peaks
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DegenerateData, NoConvergence, NonPositiveValue, ValidationError

ALPHA_WINDOW_MIN_M = 20
UNIMODAL_TOL = 0.05
GN_MAX_ITER = 200


@dataclass(frozen=True)
class FitResult:
    parameters: dict
    r_squared: float
    residual_max: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _r_squared(y, fitted) -> float:
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return min(1.0, 1.0 - ss_res / ss_tot)


def log_value(x) -> float:
    """``ln x`` for floats, decimal strings, ``mpf`` or ``BigReal`` without underflow."""
    value = getattr(x, "value", x)
    if isinstance(value, str):
        value = mpmath.mpf(value)
    if value <= 0:
        raise NonPositiveValue(f"cannot take the log of {x}")
    return float(mpmath.log(value))


# ------------------------------------------------------------ exponential


class ExponentialDecayFit(RegressorMixin, BaseEstimator):
    """Least squares of ``ln y = log_prefactor - alpha * M``.

    ``X`` is the column of ``M`` values.  ``y`` may hold floats or, via
    :meth:`fit_log`, logarithms computed elsewhere for values below double
    range.
    """

    def fit(self, X, y):
        X = check_array(X, ensure_2d=True)
        y = np.asarray(y)
        logs = np.array([log_value(v) for v in y.ravel()])
        return self.fit_log(X, logs)

    def fit_log(self, X, log_y):
        X = check_array(X, ensure_2d=True)
        m = X[:, 0]
        log_y = np.asarray(log_y, dtype=float)
        if len(m) < 3:
            raise ValidationError("need at least 3 points")
        if np.ptp(m) == 0:
            raise DegenerateData("all M values are equal")
        design = np.column_stack([np.ones_like(m), -m])
        coef, *_ = np.linalg.lstsq(design, log_y, rcond=None)
        self.log_prefactor_, self.alpha_ = float(coef[0]), float(coef[1])
        fitted = design @ coef
        self.r_squared_ = _r_squared(log_y, fitted)
        self.residual_max_ = float(np.max(np.abs(log_y - fitted)))
        self.n_features_in_ = 1
        return self

    def predict_log(self, X):
        check_is_fitted(self)
        X = check_array(X, ensure_2d=True)
        return self.log_prefactor_ - self.alpha_ * X[:, 0]

    def predict(self, X):
        return np.exp(self.predict_log(X))

    def score(self, X, y, sample_weight=None):
        """r^2 in log space, the space the fit is done in."""
        logs = np.array([log_value(v) for v in np.asarray(y).ravel()])
        return _r_squared(logs, self.predict_log(X))


def fit_exp_decay(points, min_M: int = 0) -> FitResult:
    """Fit ``lambda = exp(log_prefactor - alpha M)`` to ``(M, lambda)`` pairs.

    Points with ``M < min_M`` are dropped (pass ``ALPHA_WINDOW_MIN_M`` to skip
    the pre-asymptotic regime).
    """
    pts = [(int(m), lam) for m, lam in points if int(m) >= min_M]
    if len(pts) < 3:
        raise ValidationError("need at least 3 points in the fit window")
    X = np.array([[m] for m, _ in pts], dtype=float)
    logs = np.array([log_value(lam) for _, lam in pts])
    est = ExponentialDecayFit().fit_log(X, logs)
    return FitResult(
        parameters={"alpha": est.alpha_, "log_prefactor": est.log_prefactor_},
        r_squared=est.r_squared_,
        residual_max=est.residual_max_,
        extra={"M": [m for m, _ in pts]},
    )


# --------------------------------------------------------------- gaussian


def gaussian(j, amplitude, center, width):
    return amplitude * np.exp(-((j - center) ** 2) / (2 * width**2))


def _check_unimodal(y: np.ndarray, tol: float):
    """Reject profiles with more than one peak of prominence above ``tol * max``."""
    if np.ptp(y) == 0:
        raise DegenerateData("all entries are equal")
    # pad with zeros so a maximum at either end still counts as a peak
    padded = np.concatenate([[0.0], y, [0.0]])
    peaks, _ = find_peaks(padded, prominence=tol * y.max())
    if len(peaks) > 1:
        raise DegenerateData(f"profile has {len(peaks)} peaks with prominence above {tol:g} of the max")


def _log_quadratic_init(j, y):
    keep = y > 1e-3 * y.max()
    if keep.sum() < 3:
        keep = y > 0
    c2, c1, c0 = np.polyfit(j[keep], np.log(y[keep]), 2)
    if c2 >= 0:
        raise DegenerateData("log-profile is not concave; no Gaussian shape")
    width = np.sqrt(-1 / (2 * c2))
    center = -c1 / (2 * c2)
    amplitude = np.exp(c0 - c1**2 / (4 * c2))
    return np.array([amplitude, center, width])


def _gauss_newton(j, y, p0, max_iter=GN_MAX_ITER):
    """Levenberg-damped Gauss-Newton on ``y - A exp(-(j-mu)^2 / 2 s^2)``."""
    p = p0.astype(float)
    lam = 1e-3
    r = y - gaussian(j, *p)
    cost = r @ r
    for _ in range(max_iter):
        a, mu, s = p
        e = np.exp(-((j - mu) ** 2) / (2 * s**2))
        jac = np.column_stack([e, a * e * (j - mu) / s**2, a * e * (j - mu) ** 2 / s**3])
        jtj = jac.T @ jac
        g = jac.T @ r
        while True:
            step = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj)), g)
            trial = p + step
            r_trial = y - gaussian(j, *trial)
            c_trial = r_trial @ r_trial
            if c_trial <= cost:
                lam = max(lam / 10, 1e-12)
                break
            lam *= 10
            if lam > 1e12:
                return p
        converged = abs(cost - c_trial) <= 1e-15 * max(cost, 1e-300) or np.max(
            np.abs(step) / np.maximum(np.abs(p), 1e-12)
        ) < 1e-13
        p, r, cost = trial, r_trial, c_trial
        if converged:
            return p
    raise NoConvergence("Gauss-Newton did not converge")


class GaussianProfileFit(RegressorMixin, BaseEstimator):
    """Nonlinear least squares of ``|y|`` against ``A exp(-(X-mu)^2 / 2 sigma^2)``.

    Parameters
    ----------
    unimodal_tol : float
        Peaks whose prominence is below this fraction of the maximum are
        treated as noise when checking that the profile has a single bump.
    """

    def __init__(self, unimodal_tol: float = UNIMODAL_TOL):
        self.unimodal_tol = unimodal_tol

    def fit(self, X, y):
        X = check_array(X, ensure_2d=True)
        j = X[:, 0].astype(float)
        y = np.abs(np.asarray(y, dtype=float).ravel())
        if len(y) < 5:
            raise ValidationError("need at least 5 samples")
        order = np.argsort(j)
        j, y = j[order], y[order]
        _check_unimodal(y, self.unimodal_tol)
        p = _gauss_newton(j, y, _log_quadratic_init(j, y))
        self.amplitude_, self.center_, self.width_ = float(p[0]), float(p[1]), float(abs(p[2]))
        fitted = gaussian(j, *p)
        self.r_squared_ = _r_squared(y, fitted)
        self.residual_max_ = float(np.max(np.abs(y - fitted)))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = check_array(X, ensure_2d=True)
        return gaussian(X[:, 0], self.amplitude_, self.center_, self.width_)

    def score(self, X, y, sample_weight=None):
        return _r_squared(np.abs(np.asarray(y, dtype=float)), self.predict(X))


def fit_gaussian(v) -> FitResult:
    """Gaussian fit of ``|v_j|`` over 0-based indices ``j``."""
    v = np.asarray(v, dtype=float).ravel()
    j = np.arange(len(v), dtype=float)
    est = GaussianProfileFit().fit(j[:, None], v)
    return FitResult(
        parameters={"amplitude": est.amplitude_, "center": est.center_, "width": est.width_},
        r_squared=est.r_squared_,
        residual_max=est.residual_max_,
    )

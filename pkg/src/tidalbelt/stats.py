"""Statistical core: Pearson correlation, OLS regression, t and F tails.

Everything here runs on numpy alone.  The t- and F-distribution survival
functions are built on the regularized incomplete beta kernel:

    P(T > t)  = 0.5 * I(df/(df + t^2); df/2, 1/2)        for t >= 0
    P(F > f)  = I(d2/(d2 + d1*f); d2/2, d1/2)

OLS uses the normal equations with a Cholesky factorization.  The models
this feeds have at most three predictors, so this is numerically comfortable; an
eigenvalue condition check (> 1e12) turns rank deficiency into a clean
singular-design error instead of a garbage fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import betainc
from .errors import (
    DegenerateInputError,
    InsufficientDataError,
    InvalidInputError,
    InvalidParameterError,
    MissingFeatureError,
    SingularDesignError,
)

CONDITION_LIMIT = 1e12

RMSE_DENOMINATORS = ("n", "n-k-1")


@dataclass(frozen=True)
class CorrelationCell:
    """One entry of a correlation table: r^2, its two-sided p, and n."""

    r_squared: float
    p_value: float
    n_obs: int

    def __post_init__(self):
        if not (0.0 <= self.r_squared <= 1.0):
            raise InvalidInputError("r_squared must lie in [0, 1]")
        if not (0.0 <= self.p_value <= 1.0):
            raise InvalidInputError("p_value must lie in [0, 1]")
        if self.n_obs < 3:
            raise InvalidInputError("n_obs must be >= 3")


@dataclass(frozen=True)
class RegressionModel:
    """A fitted OLS model with its goodness-of-fit summary.

    ``coefficients`` is an ordered tuple of (predictor_name, value) pairs;
    order matters for reporting but not for prediction.  ``rmse`` follows
    the denominator convention chosen at fit time (see ols_fit).
    """

    name: str
    intercept: float
    coefficients: tuple[tuple[str, float], ...]
    r_squared: float
    p_value: float
    rmse: float
    n_obs: int

    def __post_init__(self):
        coeffs = tuple((str(n), float(v)) for n, v in self.coefficients)
        if len(coeffs) == 0:
            raise InvalidInputError("model needs at least one coefficient")
        names = [n for n, _ in coeffs]
        if len(set(names)) != len(names):
            raise InvalidInputError("predictor names must be unique")
        if not (0.0 <= self.r_squared <= 1.0):
            raise InvalidInputError("r_squared must lie in [0, 1]")
        if not (0.0 <= self.p_value <= 1.0):
            raise InvalidInputError("p_value must lie in [0, 1]")
        if not self.rmse >= 0.0:
            raise InvalidInputError("rmse must be >= 0")
        object.__setattr__(self, "coefficients", coeffs)

    def predict(self, features: dict[str, float]) -> float:
        return ols_predict(self, features)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "intercept": self.intercept,
            "coefficients": [
                {"name": n, "value": v} for n, v in self.coefficients
            ],
            "r_squared": self.r_squared,
            "p_value": self.p_value,
            "rmse": self.rmse,
            "n_obs": self.n_obs,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RegressionModel":
        try:
            return cls(
                name=str(doc["name"]),
                intercept=float(doc["intercept"]),
                coefficients=tuple(
                    (str(c["name"]), float(c["value"]))
                    for c in doc["coefficients"]
                ),
                r_squared=float(doc["r_squared"]),
                p_value=float(doc["p_value"]),
                rmse=float(doc["rmse"]),
                n_obs=int(doc["n_obs"]),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed model document: {exc}") from exc


def student_t_sf(t: float, df: int) -> float:
    """One-sided Student-t survival probability P(T > t)."""
    if df < 1:
        raise InvalidParameterError("df must be >= 1")
    t = float(t)
    if t < 0.0:
        return 1.0 - student_t_sf(-t, df)
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    return 0.5 * betainc(0.5 * df, 0.5, x)


def f_sf(f: float, d1: int, d2: int) -> float:
    """F-distribution survival probability P(F > f)."""
    if d1 < 1 or d2 < 1:
        raise InvalidParameterError("degrees of freedom must be >= 1")
    f = float(f)
    if f < 0.0:
        raise InvalidParameterError("f must be >= 0")
    if f == 0.0:
        return 1.0
    x = d2 / (d2 + d1 * f)
    return betainc(0.5 * d2, 0.5 * d1, x)


def p_from_r2(r_squared: float, n: int) -> float:
    """Two-sided p-value for a squared Pearson correlation at sample size n."""
    if not (0.0 <= r_squared <= 1.0):
        raise InvalidParameterError("r_squared must lie in [0, 1]")
    if n < 3:
        raise InsufficientDataError("need n >= 3 for a correlation p-value")
    if r_squared >= 1.0:
        return 0.0
    t = math.sqrt(r_squared * (n - 2) / (1.0 - r_squared))
    return 2.0 * student_t_sf(t, n - 2)


def p_from_f(r_squared: float, k: int, n: int) -> float:
    """Overall-F p-value for a regression R^2 with k predictors and n points."""
    if not (0.0 <= r_squared <= 1.0):
        raise InvalidParameterError("r_squared must lie in [0, 1]")
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    if n <= k + 1:
        raise InsufficientDataError("need n > k + 1 for an F-test")
    if r_squared >= 1.0:
        return 0.0
    fstat = (r_squared / k) / ((1.0 - r_squared) / (n - k - 1))
    return f_sf(fstat, k, n - k - 1)


def pearson(x, y) -> CorrelationCell:
    """Pearson correlation of two sequences, reported as r^2 with its p-value."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1 or xa.shape != ya.shape:
        raise InvalidInputError("x and y must be 1-d sequences of equal length")
    n = xa.shape[0]
    if n < 3:
        raise InsufficientDataError(f"need n >= 3 points, got {n}")
    if not (np.isfinite(xa).all() and np.isfinite(ya).all()):
        raise InvalidInputError("inputs contain non-finite values")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    constant = bool(np.all(xa == xa[0]) or np.all(ya == ya[0]))
    if sxx <= 0.0 or syy <= 0.0 or constant:
        raise DegenerateInputError("zero variance in x or y")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    r2 = r * r
    return CorrelationCell(r_squared=r2, p_value=p_from_r2(r2, n), n_obs=n)


def _solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b for symmetric positive-definite a via Cholesky."""
    low = np.linalg.cholesky(a)
    m = a.shape[0]
    z = np.empty(m)
    for i in range(m):
        z[i] = (b[i] - low[i, :i] @ z[:i]) / low[i, i]
    w = np.empty(m)
    for i in range(m - 1, -1, -1):
        w[i] = (z[i] - low[i + 1 :, i] @ w[i + 1 :]) / low[i, i]
    return w


def ols_fit(
    X,
    y,
    names: list[str],
    model_name: str = "model",
    rmse_denominator: str = "n",
) -> RegressionModel:
    """Fit ordinary least squares y ~ intercept + X via the normal equations.

    Parameters
    ----------
    X : array-like, shape (n_obs, k)
        Predictor columns, without an intercept column.
    y : array-like, shape (n_obs,)
        Dependent variable.
    names : list of str
        One name per predictor column, unique.
    model_name : str
        Label carried into the serialized model (the dependent variable).
    rmse_denominator : {"n", "n-k-1"}
        "n" divides the SSE by n_obs (population form, the default);
        "n-k-1" uses the residual degrees of freedom instead.

    Raises a singular-design error when the intercept-augmented design is
    rank deficient (condition number above 1e12); there is no pseudo-inverse
    fallback.
    """
    if rmse_denominator not in RMSE_DENOMINATORS:
        raise InvalidParameterError(
            f"rmse_denominator must be one of {RMSE_DENOMINATORS}"
        )
    xa = np.asarray(X, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim == 1:
        xa = xa[:, None]
    if xa.ndim != 2 or ya.ndim != 1 or xa.shape[0] != ya.shape[0]:
        raise InvalidInputError("X must be (n, k) and y length n")
    n, k = xa.shape
    if len(names) != k:
        raise InvalidParameterError(f"got {len(names)} names for {k} columns")
    if len(set(names)) != k:
        raise InvalidParameterError("predictor names must be unique")
    if n <= k + 1:
        raise InsufficientDataError(
            f"need more than {k + 1} observations to fit {k} predictors, got {n}"
        )
    if not (np.isfinite(xa).all() and np.isfinite(ya).all()):
        raise InvalidInputError("inputs contain non-finite values")

    design = np.column_stack([np.ones(n), xa])
    gram = design.T @ design
    eig = np.linalg.eigvalsh(gram)
    if eig[0] <= 0.0 or eig[-1] / eig[0] > CONDITION_LIMIT:
        raise SingularDesignError(
            "design matrix is rank deficient or near singular"
        )
    beta = _solve_spd(gram, design.T @ ya)

    resid = ya - design @ beta
    sse = float(resid @ resid)
    dy = ya - ya.mean()
    sst = float(dy @ dy)
    # an exactly constant y can still leave sst ~ 1e-30 through summation
    # rounding, so constancy is checked on the values themselves
    if sst <= 0.0 or bool(np.all(ya == ya[0])):
        raise DegenerateInputError("dependent variable has zero variance")
    r2 = 1.0 - sse / sst
    r2 = max(0.0, min(1.0, r2))
    denom = n if rmse_denominator == "n" else n - k - 1
    rmse = math.sqrt(sse / denom)
    return RegressionModel(
        name=model_name,
        intercept=float(beta[0]),
        coefficients=tuple(zip(names, (float(b) for b in beta[1:]))),
        r_squared=r2,
        p_value=p_from_f(r2, k, n),
        rmse=rmse,
        n_obs=n,
    )


def ols_predict(model: RegressionModel, features: dict[str, float]) -> float:
    """Evaluate a fitted model at named feature values."""
    total = model.intercept
    for name, coef in model.coefficients:
        if name not in features:
            raise MissingFeatureError(f"feature {name!r} missing from input")
        total += coef * float(features[name])
    return total

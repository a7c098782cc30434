"""Residual diagnostics: ACF/PACF, Ljung-Box, normality, Q-Q data.

The estimators follow the standard conventions: ACF with the biased
(full-sample) denominator, PACF through Durbin-Levinson, Ljung-Box against
a chi-square tail, and Jarque-Bera for normality. Chi-square tails and
normal quantiles come from scipy's incomplete-gamma and inverse-normal
special functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, ndtri

from .errors import DegenerateInputError, ValidationError


@dataclass(frozen=True)
class AcfResult:
    lags: np.ndarray
    values: np.ndarray
    confidence_band: float


@dataclass(frozen=True)
class LjungBoxResult:
    statistic: float
    lags_used: int
    dof: int
    p_value: float


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    p_value: float
    method: str


def _checked(residuals) -> np.ndarray:
    x = np.asarray(residuals, dtype=float)
    if x.ndim != 1:
        raise ValidationError("residuals must be a 1-d vector")
    if not np.all(np.isfinite(x)):
        raise ValidationError("residuals must be finite")
    return x


def _autocorrelations(x: np.ndarray, max_lag: int) -> np.ndarray:
    """rho_0..rho_L with the biased denominator sum((x - mean)^2)."""
    centered = x - x.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise DegenerateInputError("autocorrelation is undefined for a constant series")
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    for k in range(1, max_lag + 1):
        rho[k] = float(centered[k:] @ centered[:-k]) / denom
    return rho


def acf(residuals, max_lag: int) -> AcfResult:
    """Sample autocorrelations at lags 0..max_lag."""
    x = _checked(residuals)
    if max_lag < 1:
        raise ValidationError(f"max_lag must be >= 1, got {max_lag}")
    if x.size < max_lag + 1:
        raise ValidationError(
            f"need at least max_lag + 1 = {max_lag + 1} observations, got {x.size}"
        )
    rho = _autocorrelations(x, max_lag)
    return AcfResult(
        lags=np.arange(max_lag + 1),
        values=rho,
        confidence_band=1.96 / np.sqrt(x.size),
    )


def pacf(residuals, max_lag: int) -> AcfResult:
    """Partial autocorrelations via Durbin-Levinson, lag 0 reported as 1."""
    x = _checked(residuals)
    if max_lag < 1:
        raise ValidationError(f"max_lag must be >= 1, got {max_lag}")
    if x.size < max_lag + 1:
        raise ValidationError(
            f"need at least max_lag + 1 = {max_lag + 1} observations, got {x.size}"
        )
    rho = _autocorrelations(x, max_lag)
    values = np.zeros(max_lag + 1)
    values[0] = 1.0
    phi_prev = np.zeros(max_lag + 1)
    for k in range(1, max_lag + 1):
        num = rho[k] - float(phi_prev[1:k] @ rho[k - 1 : 0 : -1])
        den = 1.0 - float(phi_prev[1:k] @ rho[1:k])
        if den == 0.0:
            # perfectly predictable series; remaining partials are zero
            break
        phi_kk = num / den
        values[k] = phi_kk
        phi = phi_prev.copy()
        phi[k] = phi_kk
        for j in range(1, k):
            phi[j] = phi_prev[j] - phi_kk * phi_prev[k - j]
        phi_prev = phi
    return AcfResult(
        lags=np.arange(max_lag + 1),
        values=values,
        confidence_band=1.96 / np.sqrt(x.size),
    )


def chi_square_sf(x: float, dof: int) -> float:
    """Upper tail of the chi-square distribution (regularized upper gamma)."""
    if x < 0:
        raise ValidationError("chi-square statistic must be >= 0")
    return float(gammaincc(dof / 2.0, x / 2.0))


def ljung_box(residuals, lags: int, fitted_params: int = 0) -> LjungBoxResult:
    """Portmanteau test of joint zero autocorrelation up to ``lags``.

    fitted_params shrinks the degrees of freedom (the AR order when testing
    AR-corrected innovations, 0 for raw regression residuals).
    """
    x = _checked(residuals)
    if lags < 1:
        raise ValidationError(f"lags must be >= 1, got {lags}")
    if x.size <= lags:
        raise ValidationError(f"need more than {lags} observations, got {x.size}")
    n = x.size
    rho = _autocorrelations(x, lags)
    q = n * (n + 2.0) * float(np.sum(rho[1:] ** 2 / (n - np.arange(1, lags + 1))))
    dof = max(1, lags - fitted_params)
    return LjungBoxResult(
        statistic=q, lags_used=lags, dof=dof, p_value=chi_square_sf(q, dof)
    )


def default_ljung_box_lags(n: int) -> int:
    return max(1, min(10, n // 5))


def normality_test(residuals) -> NormalityResult:
    """Jarque-Bera test of residual normality (chi-square with 2 dof)."""
    x = _checked(residuals)
    if x.size < 8:
        raise ValidationError(f"need at least 8 observations, got {x.size}")
    centered = x - x.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise DegenerateInputError("normality test is undefined for a constant series")
    skew = float(np.mean(centered**3)) / m2**1.5
    kurtosis = float(np.mean(centered**4)) / m2**2
    statistic = x.size * (skew**2 / 6.0 + (kurtosis - 3.0) ** 2 / 24.0)
    return NormalityResult(
        statistic=statistic,
        p_value=chi_square_sf(statistic, 2),
        method="jarque-bera",
    )


def normal_quantile(p) -> np.ndarray:
    """Inverse standard-normal CDF."""
    return ndtri(np.asarray(p, dtype=float))


def qq_points(residuals) -> list[tuple[float, float]]:
    """(theoretical, sample) quantile pairs at plotting positions (i-0.5)/n."""
    x = _checked(residuals)
    if x.size < 3:
        raise ValidationError(f"need at least 3 observations, got {x.size}")
    n = x.size
    positions = (np.arange(1, n + 1) - 0.5) / n
    theoretical = normal_quantile(positions)
    return list(zip(theoretical.tolist(), np.sort(x).tolist()))

"""Estimation of two-component 1-D Gaussian mixtures and their Bayes rules.

Two estimators are provided and usually chained:

* ``fit_mom`` solves the equal-variance four-moment system.  Writing the
  mixture as w*N(mu1, s^2) + (1-w)*N(mu2, s^2) with lam = w*(1-w) and
  v = lam*(mu2-mu1)^2 (the product of the centred means), matching the
  first four central moments reduces, after Pearson-style elimination, to
  the depressed cubic

      2*v^3 + (M4 - 3*M2^2)*v - M3^2 = 0.

  Any positive root yields an admissible lam in (0, 1/4]; when several
  roots survive, the one whose implied fifth moment best matches the
  sample fifth moment wins (ties broken toward larger v).  If the system
  has no meaningful positive root the fit falls back to a single
  Gaussian.

* ``fit_em`` runs standard two-component EM (unequal variances allowed)
  from a given initialiser, O(n) per iteration, stopping on a relative
  log-likelihood gain below ``tol``.

The Bayes rule of a known mixture has a single threshold when the
variances agree and otherwise the (up to) two real roots of the density
equality condition; ``bayes_error`` integrates the misassigned mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientSampleError, NoBoundaryError
from .mathkit import q_function
from .model import W_FLOOR, Mixture1D, clamped_mixture1d, sigma_floor

MOM_MIN_SAMPLES = 16
EM_MAX_ITER = 200
EM_TOL = 1e-8

# Cumulants smaller than this many null standard errors are treated as
# noise: the moment system is then considered to have no real two-component
# solution and the fit falls back to a single Gaussian.
_CUMULANT_GATE = 4.0

_EQUAL_SIGMA_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class FitReport:
    """A fitted 1-D mixture plus how it was obtained."""

    fitted: Mixture1D
    method: str
    iterations: int
    sample_moments: np.ndarray          # mean and central moments 2..6
    loglik_trace: np.ndarray | None = None


def central_moments(samples: np.ndarray) -> np.ndarray:
    """Mean followed by central moments of order 2..6."""
    x = np.asarray(samples, dtype=float).ravel()
    mean = float(np.mean(x))
    d = x - mean
    out = [mean]
    power = d.copy()
    for _ in range(2, 7):
        power = power * d
        out.append(float(np.mean(power)))
    return np.array(out)


def fit_mom(samples: np.ndarray) -> FitReport:
    """Equal-variance method-of-moments fit.

    Requires at least ``MOM_MIN_SAMPLES`` observations.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MOM_MIN_SAMPLES:
        raise InsufficientSampleError(
            f"method of moments needs n >= {MOM_MIN_SAMPLES}, got {x.size}"
        )
    moments = central_moments(x)
    return fit_mom_from_moments(moments, n=x.size)


def fit_mom_from_moments(moments: np.ndarray, n: int | None = None) -> FitReport:
    """Solve the moment system given [mean, M2, M3, M4, (M5, M6)].

    ``n`` enables the finite-sample noise gate on the third and fourth
    cumulants; pass None when feeding exact population moments.
    """
    moments = np.asarray(moments, dtype=float).ravel()
    if moments.size < 4:
        raise DomainError("need at least mean and central moments 2..4")
    mean, m2, m3, m4 = moments[:4]
    m5 = float(moments[4]) if moments.size >= 5 else None
    if m2 <= 0.0:
        return _single_gaussian_report(mean, 0.0, moments)
    s = math.sqrt(m2)

    # Standardise so the cubic is solved in O(1)-sized quantities.
    m3s = m3 / s**3
    m4s = m4 / s**4
    m5s = None if m5 is None else m5 / s**5
    kurt = m4s - 3.0
    skew_sq = m3s * m3s

    if n is not None:
        gate_skew = _CUMULANT_GATE * math.sqrt(6.0 / n)
        gate_kurt = _CUMULANT_GATE * math.sqrt(24.0 / n)
        if abs(m3s) < gate_skew and abs(kurt) < gate_kurt:
            return _single_gaussian_report(mean, s, moments)

    roots = np.roots([2.0, 0.0, kurt, -skew_sq])
    candidates = []
    for root in roots:
        if abs(root.imag) > 1e-8 * (1.0 + abs(root.real)):
            continue
        v = float(root.real)
        if v <= 1e-10:
            continue
        denom = kurt + 6.0 * v * v
        if denom <= 0.0:
            continue
        lam = min(v * v / denom, 0.25)
        if lam <= 0.0:
            continue
        candidates.append((v, lam))
    if not candidates:
        return _single_gaussian_report(mean, s, moments)

    scored = []
    for v, lam in candidates:
        disc = math.sqrt(max(0.0, 1.0 - 4.0 * lam))
        if m3s > 0.0:
            w = 0.5 * (1.0 + disc)
        elif m3s < 0.0:
            w = 0.5 * (1.0 - disc)
        else:
            w = 0.5
        delta = math.sqrt(v / lam)
        var_within = max(1.0 - v, 0.0)
        if m5s is None:
            score = 0.0
        else:
            model_m3 = lam * (2.0 * w - 1.0) * delta**3
            model_m5 = (
                lam * (2.0 * w - 1.0) * delta**5 * (1.0 - 2.0 * lam)
                + 10.0 * var_within * model_m3
            )
            score = abs(model_m5 - m5s)
        scored.append((score, -v, v, lam, w, delta, var_within))
    scored.sort()
    _, _, v, lam, w, delta, var_within = scored[0]

    mu1 = mean + s * (-(1.0 - w) * delta)
    mu2 = mean + s * (w * delta)
    sigma = s * math.sqrt(max(var_within, 1e-18))
    fitted = clamped_mixture1d(mu1, mu2, sigma, sigma, w, scale=s)
    return FitReport(
        fitted=fitted, method="mom", iterations=0, sample_moments=moments
    )


def _single_gaussian_report(mean: float, s: float, moments: np.ndarray) -> FitReport:
    scale = max(s, abs(mean))
    sigma = max(s, sigma_floor(scale))
    fitted = clamped_mixture1d(mean, mean, sigma, sigma, 0.5, scale=scale)
    return FitReport(
        fitted=fitted, method="mom", iterations=0, sample_moments=moments
    )


def fit_em(
    samples: np.ndarray,
    init: Mixture1D,
    max_iter: int = EM_MAX_ITER,
    tol: float = EM_TOL,
) -> FitReport:
    """Two-component EM refinement from ``init``; sigmas may differ."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise InsufficientSampleError(f"EM needs n >= 2, got {x.size}")
    scale = max(float(np.std(x)), float(abs(np.mean(x))), 1e-12)
    floor = sigma_floor(scale)

    mu = np.array([init.mu1, init.mu2])
    sig = np.maximum(np.array([init.sigma1, init.sigma2]), floor)
    w = float(np.clip(init.w, W_FLOOR, 1.0 - W_FLOOR))

    trace = []
    ll_prev = -np.inf
    iterations = 0
    half_log_2pi = 0.5 * math.log(2.0 * math.pi)
    for iterations in range(1, max_iter + 1):
        z1 = (x - mu[0]) / sig[0]
        z2 = (x - mu[1]) / sig[1]
        lp1 = math.log(w) - math.log(sig[0]) - half_log_2pi - 0.5 * z1 * z1
        lp2 = math.log(1.0 - w) - math.log(sig[1]) - half_log_2pi - 0.5 * z2 * z2
        hi = np.maximum(lp1, lp2)
        tot = hi + np.log(np.exp(lp1 - hi) + np.exp(lp2 - hi))
        ll = float(np.sum(tot))
        trace.append(ll)
        r1 = np.exp(lp1 - tot)

        n1 = float(np.sum(r1))
        n2 = x.size - n1
        if n1 <= 0.0 or n2 <= 0.0:
            break
        mu1 = float(np.dot(r1, x)) / n1
        mu2 = (float(np.sum(x)) - float(np.dot(r1, x))) / n2
        d1 = x - mu1
        d2 = x - mu2
        var1 = float(np.dot(r1, d1 * d1)) / n1
        var2 = float(np.dot(d2, d2) - np.dot(r1, d2 * d2)) / n2
        mu = np.array([mu1, mu2])
        sig = np.maximum(np.sqrt([max(var1, 0.0), max(var2, 0.0)]), floor)
        w = float(np.clip(n1 / x.size, W_FLOOR, 1.0 - W_FLOOR))

        if ll - ll_prev <= tol * (abs(ll_prev) + 1e-12) and iterations > 1:
            break
        ll_prev = ll

    if mu[0] <= mu[1]:
        fitted = clamped_mixture1d(mu[0], mu[1], sig[0], sig[1], w, scale=scale)
    else:
        fitted = clamped_mixture1d(mu[1], mu[0], sig[1], sig[0], 1.0 - w, scale=scale)
    return FitReport(
        fitted=fitted,
        method="em",
        iterations=iterations,
        sample_moments=central_moments(x),
        loglik_trace=np.array(trace),
    )


def fit_mixture(samples: np.ndarray, method: str = "mom+em") -> FitReport:
    """Dispatch on learner name: ``mom``, ``em`` or ``mom+em``."""
    if method == "mom":
        return fit_mom(samples)
    if method == "em":
        x = np.asarray(samples, dtype=float).ravel()
        if x.size < 2:
            raise InsufficientSampleError("EM needs n >= 2")
        q25, q75 = np.quantile(x, [0.25, 0.75])
        scale = max(float(np.std(x)), float(abs(np.mean(x))), 1e-12)
        if q75 <= q25:
            q25, q75 = q25 - 0.5 * scale, q25 + 0.5 * scale
        init = clamped_mixture1d(
            q25, q75, 0.5 * scale, 0.5 * scale, 0.5, scale=scale
        )
        return fit_em(x, init)
    if method == "mom+em":
        mom = fit_mom(samples)
        em = fit_em(samples, mom.fitted)
        return FitReport(
            fitted=em.fitted,
            method="mom+em",
            iterations=em.iterations,
            sample_moments=mom.sample_moments,
            loglik_trace=em.loglik_trace,
        )
    raise DomainError(f"unknown learner {method!r}")


# ---------------------------------------------------------------------------
# Bayes rule of a known 1-D mixture
# ---------------------------------------------------------------------------

def _is_equal_sigma(mix: Mixture1D) -> bool:
    return abs(mix.sigma1 - mix.sigma2) <= _EQUAL_SIGMA_RTOL * max(
        mix.sigma1, mix.sigma2
    )


def _log_density_gap(mix: Mixture1D, t: float) -> float:
    """ln(w * phi1(t)) - ln((1-w) * phi2(t))."""
    s1 = 1.0 / mix.sigma1**2
    s2 = 1.0 / mix.sigma2**2
    return (
        math.log(mix.w / (1.0 - mix.w))
        + 0.5 * math.log(s1 / s2)
        - 0.5 * s1 * (t - mix.mu1) ** 2
        + 0.5 * s2 * (t - mix.mu2) ** 2
    )


def bayes_thresholds(mix: Mixture1D) -> np.ndarray:
    """Decision threshold(s) where the weighted densities are equal.

    Equal sigmas give the single point

        t = (mu1 + mu2)/2 - sigma^2/(mu1 - mu2) * ln(w/(1-w));

    otherwise the two real roots of the density-equality quadratic,
    sorted ascending and Newton-polished so the weighted densities match
    to ~1e-12 relative.
    """
    scale = max(abs(mix.mu1), abs(mix.mu2), mix.sigma1, mix.sigma2)
    delta = mix.mu2 - mix.mu1
    if _is_equal_sigma(mix):
        if abs(delta) <= 1e-15 * scale:
            raise NoBoundaryError("identical components have no threshold")
        sigma2 = mix.sigma1 * mix.sigma2
        t = 0.5 * (mix.mu1 + mix.mu2) - sigma2 / (mix.mu1 - mix.mu2) * math.log(
            mix.w / (1.0 - mix.w)
        )
        return np.array([t])

    s1 = 1.0 / mix.sigma1**2
    s2 = 1.0 / mix.sigma2**2
    a = s1 - s2
    b = 2.0 * delta * s2
    c = -(delta**2) * s2 + math.log(s2 / s1) - 2.0 * math.log(mix.w / (1.0 - mix.w))
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise NoBoundaryError("one component dominates everywhere")
    sqrt_disc = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sqrt_disc, b if b != 0.0 else 1.0))
    if q == 0.0:
        roots = [0.0, 0.0]
    else:
        roots = [q / a, c / q]
    ts = []
    for x in roots:
        t = x + mix.mu1
        for _ in range(3):
            g = _log_density_gap(mix, t)
            dg = -(t - mix.mu1) * s1 + (t - mix.mu2) * s2
            if dg == 0.0 or not math.isfinite(dg):
                break
            step = g / dg
            if not math.isfinite(step):
                break
            t -= step
        ts.append(t)
    return np.sort(np.array(ts))


def region_component_labels(mix: Mixture1D, thresholds: np.ndarray) -> np.ndarray:
    """Winning component (0 or 1) for each interval cut by the thresholds.

    One threshold: the component with the smaller mean wins below.  Two
    thresholds: the narrower component wins the middle interval.
    """
    thresholds = np.asarray(thresholds, dtype=float).ravel()
    if thresholds.size == 1:
        low = 0 if mix.mu1 <= mix.mu2 else 1
        return np.array([low, 1 - low])
    inner = 0 if mix.sigma1 <= mix.sigma2 else 1
    return np.array([1 - inner, inner, 1 - inner])


def bayes_error(mix: Mixture1D) -> float:
    """Misclassification probability of the mixture's own Bayes rule.

    Always in [0, 0.5]; degenerate mixtures without a decision boundary
    yield min(w, 1-w), the error of always guessing the majority label.
    """
    if mix.mu1 > mix.mu2:
        mix = mix.swapped()
    w = mix.w
    if _is_equal_sigma(mix):
        sigma = 0.5 * (mix.sigma1 + mix.sigma2)
        gamma = (mix.mu2 - mix.mu1) / (2.0 * sigma)
        if gamma <= 1e-12:
            return min(w, 1.0 - w)
        shift = math.log(w / (1.0 - w)) / (2.0 * gamma)
        err = w * q_function(gamma + shift) + (1.0 - w) * q_function(gamma - shift)
        return float(min(max(err, 0.0), 0.5))

    try:
        t1, t2 = bayes_thresholds(mix)
    except NoBoundaryError:
        return min(w, 1.0 - w)
    inner = 0 if mix.sigma1 <= mix.sigma2 else 1
    params = [(mix.mu1, mix.sigma1, w), (mix.mu2, mix.sigma2, 1.0 - w)]

    def mass_inside(mu, sigma):
        return q_function((t1 - mu) / sigma) - q_function((t2 - mu) / sigma)

    mu_in, sig_in, w_in = params[inner]
    mu_out, sig_out, w_out = params[1 - inner]
    err = w_in * (1.0 - mass_inside(mu_in, sig_in)) + w_out * mass_inside(
        mu_out, sig_out
    )
    return float(min(max(err, 0.0), 0.5))


def estimated_separability_bound(gamma: float, epsilon: float) -> float:
    """High-probability cap (3*gamma + eps) / (1 - 2*sqrt(gamma^2 + eps))
    on the separability fitted from samples of a gamma-separable mixture.

    Valid for gamma < 1/2 with gamma^2 + eps < 1/4.
    """
    if gamma < 0.0 or epsilon < 0.0:
        raise DomainError("gamma and epsilon must be nonnegative")
    if gamma >= 0.5:
        raise DomainError(f"requires gamma < 1/2, got {gamma}")
    if gamma * gamma + epsilon >= 0.25:
        raise DomainError("requires gamma^2 + epsilon < 1/4")
    return (3.0 * gamma + epsilon) / (1.0 - 2.0 * math.sqrt(gamma**2 + epsilon))

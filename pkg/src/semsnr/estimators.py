"""SNR estimation techniques.

Every single-image technique is a rule for predicting the noise-free
autocorrelation peak r_nf(0) from lags k >= 1; the estimate is then
(r_nf - mean^2) / (r(0) - r_nf) through the shared back-end in
:mod:`semsnr.correlation`.  The two-image techniques work from the
cross-correlation of two acquisitions of the same scene.

Failure modes raise typed :class:`~semsnr.errors.EstimatorError` subclasses;
:func:`estimate_all` converts them to per-method statuses so a benchmark run
never aborts on a single degenerate image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlation import AcfCurve, autocorrelation, cross_correlate, snr_db, snr_from_peaks
from .errors import (
    DegenerateError,
    DomainError,
    EstimatorError,
    LogDomainError,
    NonpositiveCorrelationError,
    NoPeakError,
    NonStationaryError,
    SingularFitError,
)
from .raster import Raster, raster_from_array

SINGLE_IMAGE_METHODS = ("nn", "fol", "lsr", "nllsr", "asnn", "acldr", "chillsr")
TWO_IMAGE_METHODS = ("frank_alali", "smart")
ALL_METHODS = SINGLE_IMAGE_METHODS + TWO_IMAGE_METHODS

EPSILON_POLICIES = ("half_gap", "zero")


@dataclass(frozen=True)
class EstimatorConfig:
    """Shared tuning knobs for the estimator suite.

    ``n_points`` is the number of autocorrelation lags used by fitting
    methods, ``lag_start`` the first lag they use (the log-log fit starts at
    lag 2 by default since its model diverges from a finite peak at lag 0).
    ``epsilon_policy`` selects the residual-error term of the line fit:
    "half_gap" adds half the drop from the noisy peak to the first lag,
    "zero" omits it.
    """

    n_points: int = 4
    lag_start: int = 1
    nllsr_lag_start: int = 2
    nllsr_order: int = 1
    acldr_order: int = 2
    chillsr_points: int = 4
    epsilon_policy: str = "half_gap"
    asnn_slope: float = 0.99744
    asnn_intercept: float = 0.00645
    chillsr_correction: tuple[float, float, float] = (0.0, 1.0, 0.0)
    smart_shift: int = 4
    smart_roi: int | None = None

    def __post_init__(self):
        if self.n_points < 2:
            raise DomainError("n_points must be at least 2")
        if self.lag_start < 1 or self.nllsr_lag_start < 1:
            raise DomainError("lag_start must be at least 1")
        if self.nllsr_order < 1 or self.acldr_order < 1:
            raise DomainError("orders must be at least 1")
        if self.chillsr_points < 4:
            raise DomainError("the spline needs at least 4 lags")
        if self.epsilon_policy not in EPSILON_POLICIES:
            raise DomainError(f"epsilon_policy must be one of {EPSILON_POLICIES}")
        if self.smart_shift < 1:
            raise DomainError("smart_shift must be at least 1")


DEFAULT_CONFIG = EstimatorConfig()


@dataclass(frozen=True)
class SnrEstimate:
    """One technique's output: linear SNR, dB, peak prediction, diagnostics."""

    method: str
    status: str = "ok"
    snr_linear: float = math.nan
    snr_db: float = math.nan
    predicted_nf_peak: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _ok(method: str, snr: float, peak: float | None = None, **diag) -> SnrEstimate:
    return SnrEstimate(
        method=method,
        status="ok",
        snr_linear=snr,
        snr_db=snr_db(snr),
        predicted_nf_peak=peak,
        diagnostics=diag,
    )


def _infinite(method: str, **diag) -> SnrEstimate:
    return SnrEstimate(
        method=method,
        status="infinite",
        snr_linear=math.inf,
        snr_db=math.inf,
        diagnostics=diag,
    )


# --- curve-level peak predictors ---------------------------------------------


def nn_peak(r_x1: float, r_y1: float) -> float:
    """Average of the two unit-offset autocorrelation values."""
    return 0.5 * (r_x1 + r_y1)


def fol_peak(r1: float, r2: float) -> float:
    """Linear extrapolation through lags 1 and 2 evaluated at lag 0."""
    return 2.0 * r1 - r2


def _line_fit(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Least-squares intercept and slope via the normal equations."""
    design = np.column_stack([np.ones_like(xs), xs])
    normal = design.T @ design
    if abs(np.linalg.det(normal)) < 1e-300:
        raise SingularFitError("collinear abscissae in line fit")
    alpha, beta = np.linalg.solve(normal, design.T @ ys)
    return float(alpha), float(beta)


def lsr_peak(curve: AcfCurve, cfg: EstimatorConfig = DEFAULT_CONFIG) -> tuple[float, dict]:
    """Line fit over ``n_points`` lags, evaluated at lag 0 plus the error term."""
    lags = np.arange(cfg.lag_start, cfg.lag_start + cfg.n_points)
    ys = np.array([curve.value(int(k)) for k in lags])
    alpha, beta = _line_fit(lags.astype(np.float64), ys)
    if cfg.epsilon_policy == "half_gap":
        eps = 0.5 * (curve.value(0) - curve.value(1))
    else:
        eps = 0.0
    return alpha + eps, {"alpha": alpha, "beta": beta, "epsilon": eps}


def nllsr_peak(curve: AcfCurve, cfg: EstimatorConfig = DEFAULT_CONFIG,
               offset: float = 0.0) -> tuple[float, dict]:
    """Log-log power-law fit evaluated at lag 1 with a multiplicative error term.

    The model value at lag 0 is identically zero, so the fit is evaluated at
    the nearest lag where the power-law form is finite.  The multiplicative
    error term is the half-gap computed in the log domain, sqrt(r(0)/r(1)).
    ``offset`` is subtracted from every curve value before the fit and added
    back to the prediction; image-level callers pass the squared mean so the
    power law fits the covariance structure rather than the flat offset that
    dominates raw products.
    """
    if cfg.nllsr_order != 1:
        raise DomainError("only the first-order log-log fit is supported")
    lags = np.arange(cfg.nllsr_lag_start, cfg.nllsr_lag_start + cfg.n_points)
    ys = np.array([curve.value(int(k)) for k in lags]) - offset
    if np.any(ys <= 0.0):
        raise LogDomainError("autocorrelation values must be positive for the log-log fit")
    ln_alpha, beta = _line_fit(np.log(lags.astype(np.float64)), np.log(ys))
    alpha = math.exp(ln_alpha)
    if cfg.epsilon_policy == "half_gap":
        r0, r1 = curve.value(0) - offset, curve.value(1) - offset
        if r0 <= 0.0 or r1 <= 0.0:
            raise LogDomainError("peak values must be positive for the log-domain error term")
        eps = math.sqrt(r0 / r1)
    else:
        eps = 1.0
    return alpha * eps + offset, {"alpha": alpha, "beta": beta, "epsilon": eps}


@dataclass(frozen=True)
class LevinsonResult:
    """Order-recursive Toeplitz solution: monic filter tail, reflections, errors."""

    ar_coeffs: np.ndarray  # a_1..a_M of the monic prediction-error filter
    reflection: np.ndarray  # R_1..R_M (R_m equals the new last coefficient a_m)
    errors: np.ndarray  # prediction error power after each stage, errors[0] = r(0)


def levinson_durbin(acf_values, order: int, allow_marginal: bool = False) -> LevinsonResult:
    """Solve the Toeplitz normal equations by order recursion.

    The fitted model is x_t = -sum_k a_k x_{t-k} + e_t; the returned
    coefficients satisfy the Yule-Walker system Toeplitz(r) phi = r[1:]
    with phi = -a.  A reflection coefficient reaching the unit circle raises
    a non-stationary-sequence error; ``allow_marginal`` tolerates |R| == 1 on
    the final stage (perfectly predictable sequence, error power zero).
    """
    r = np.asarray(acf_values, dtype=np.float64)
    if r.ndim != 1 or r.size < 2:
        raise DomainError("need a 1-D sequence of at least two autocorrelation values")
    if r[0] <= 0.0:
        raise DomainError("zero-lag value must be positive")
    if not (1 <= order < r.size):
        raise DomainError(f"order must satisfy 1 <= order < {r.size}, got {order}")

    a = np.zeros(order)
    reflection = np.zeros(order)
    errors = np.zeros(order + 1)
    errors[0] = r[0]
    for m in range(1, order + 1):
        acc = r[m] + float(np.dot(a[: m - 1], r[m - 1 : 0 : -1]))
        k = -acc / errors[m - 1]
        final = m == order
        if abs(k) >= 1.0 and not (allow_marginal and final and abs(k) <= 1.0):
            raise NonStationaryError(
                f"reflection coefficient {k} left the unit circle at stage {m}"
            )
        prev = a[: m - 1].copy()
        a[: m - 1] = prev + k * prev[::-1]
        a[m - 1] = k
        reflection[m - 1] = k
        errors[m] = errors[m - 1] * (1.0 - k * k)
    return LevinsonResult(ar_coeffs=a, reflection=reflection, errors=errors)


def acldr_peak(tail_values, order: int) -> tuple[float, dict]:
    """Backward extrapolation of the autocorrelation tail to lag 0.

    The tail r(1..K) is fed to the order recursion as a lagged sequence; the
    fitted autoregression is then inverted at its first Yule-Walker equation,
    where the unknown lag-0 sample appears, to predict the noise-free peak.
    """
    tail = np.asarray(tail_values, dtype=np.float64)
    if tail.size < order + 1:
        raise DomainError(f"need at least {order + 1} tail values for order {order}")
    ld = levinson_durbin(tail, order, allow_marginal=True)
    phi = -ld.ar_coeffs
    if abs(phi[0]) < 1e-12:
        raise DegenerateError("backward extrapolation is ill-conditioned (phi_1 ~ 0)")
    # tail[k-2] holds r(k-1): the first Yule-Walker equation reads
    # r(1) = phi_1 r(0) + sum_{k>=2} phi_k r(k-1)
    acc = tail[0] - float(np.dot(phi[1:], tail[: order - 1]))
    peak = acc / phi[0]
    return peak, {
        "ar_coeffs": ld.ar_coeffs.tolist(),
        "reflection": ld.reflection.tolist(),
        "error_power": ld.errors.tolist(),
    }


def _pchip_tangents(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Shape-preserving (monotone) cubic Hermite tangents, one-sided at the ends."""
    h = np.diff(xs)
    delta = np.diff(ys) / h
    n = xs.size
    d = np.zeros(n)
    for i in range(1, n - 1):
        if delta[i - 1] * delta[i] <= 0.0:
            d[i] = 0.0
        else:
            w1 = 2.0 * h[i] + h[i - 1]
            w2 = h[i] + 2.0 * h[i - 1]
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i])

    def edge(h0, h1, d0, d1):
        t = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
        if t * d0 <= 0.0:
            return 0.0
        if d0 * d1 < 0.0 and abs(t) > 3.0 * abs(d0):
            return 3.0 * d0
        return t

    d[0] = edge(h[0], h[1], delta[0], delta[1])
    d[-1] = edge(h[-1], h[-2], delta[-1], delta[-2])
    return d


def _hermite_eval(x0, x1, y0, y1, d0, d1, x) -> float:
    h = x1 - x0
    t = (x - x0) / h
    h00 = 2 * t**3 - 3 * t**2 + 1
    h10 = t**3 - 2 * t**2 + t
    h01 = -2 * t**3 + 3 * t**2
    h11 = t**3 - t**2
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1


def chillsr_peak(curve: AcfCurve, cfg: EstimatorConfig = DEFAULT_CONFIG) -> tuple[float, dict]:
    """Shape-preserving cubic Hermite spline through lags 1..K evaluated at lag 0.

    The first segment of the spline, whose end tangent comes from the
    one-sided shape-preserving rule, is extrapolated across the mirror point
    at lag 1 down to lag 0.
    """
    lags = np.arange(1, cfg.chillsr_points + 1, dtype=np.float64)
    ys = np.array([curve.value(int(k)) for k in lags])
    d = _pchip_tangents(lags, ys)
    peak = _hermite_eval(lags[0], lags[1], ys[0], ys[1], d[0], d[1], 0.0)
    return peak, {"tangents": d.tolist()}


def asnn_correct(snr_base: float, cfg: EstimatorConfig = DEFAULT_CONFIG) -> float:
    """Published affine correction of the unit-offset estimate."""
    return cfg.asnn_slope * snr_base - cfg.asnn_intercept


# --- image-level estimators ---------------------------------------------------


def _estimate_via_peak(method: str, img: Raster, peak_fn, max_lag: int,
                       cfg: EstimatorConfig) -> SnrEstimate:
    curve = autocorrelation(img, max_lag=max_lag, axis="x")
    peak, diag = peak_fn(curve)
    snr = snr_from_peaks(curve.value(0), peak, curve.mean)
    return _ok(method, snr, peak=peak, **diag)


def estimate_nn(img: Raster, cfg: EstimatorConfig = DEFAULT_CONFIG) -> SnrEstimate:
    """Nearest-offset prediction: r_nf(0) ~ (r(1,0) + r(0,1)) / 2."""
    curve_x = autocorrelation(img, max_lag=1, axis="x")
    curve_y = autocorrelation(img, max_lag=1, axis="y")
    peak = nn_peak(curve_x.value(1), curve_y.value(1))
    snr = snr_from_peaks(curve_x.value(0), peak, curve_x.mean)
    return _ok("nn", snr, peak=peak, r_x1=curve_x.value(1), r_y1=curve_y.value(1))


def estimate_fol(img: Raster, cfg: EstimatorConfig = DEFAULT_CONFIG) -> SnrEstimate:
    """First-order extrapolation through lags 1 and 2 of the x profile."""
    curve = autocorrelation(img, max_lag=2, axis="x")
    peak = fol_peak(curve.value(1), curve.value(2))
    snr = snr_from_peaks(curve.value(0), peak, curve.mean)
    return _ok("fol", snr, peak=peak, r1=curve.value(1), r2=curve.value(2))


def estimate_lsr(img: Raster, cfg: EstimatorConfig = DEFAULT_CONFIG) -> SnrEstimate:
    """Least-squares line through the early autocorrelation tail."""
    max_lag = cfg.lag_start + cfg.n_points - 1
    return _estimate_via_peak("lsr", img, lambda c: lsr_peak(c, cfg), max_lag, cfg)


def _xy_mean_curve(img: Raster, max_lag: int) -> AcfCurve:
    """Average of the x and y autocorrelation profiles (halves tail variance)."""
    cx = autocorrelation(img, max_lag=max_lag, axis="x")
    cy = autocorrelation(img, max_lag=max_lag, axis="y")
    return AcfCurve(lags=cx.lags, values=0.5 * (cx.values + cy.values),
                    mean=cx.mean, axis="xy")


def estimate_nllsr(img: Raster, cfg: EstimatorConfig = DEFAULT_CONFIG) -> SnrEstimate:
    """Log-log power-law fit of the covariance tail (squared mean restored).

    Fits the average of the two axis profiles; the single-axis tail is noisy
    enough at low SNR to tip the extrapolation above the measured peak.
    """
    max_lag = cfg.nllsr_lag_start + cfg.n_points - 1
    curve = _xy_mean_curve(img, max_lag)
    peak, diag = nllsr_peak(curve, cfg, offset=curve.mean**2)
    snr = snr_from_peaks(curve.value(0), peak, curve.mean)
    return _ok("nllsr", snr, peak=peak, **diag)


def estimate_asnn(img: Raster, cfg: EstimatorConfig = DEFAULT_CONFIG) -> SnrEstimate:
    """Affine-corrected nearest-offset estimate."""
    base = estimate_nn(img, cfg)
    corrected = asnn_correct(base.snr_linear, cfg)
    if corrected <= 0.0:
        raise DegenerateError(f"corrected SNR {corrected} is not positive")
    return _ok("asnn", corrected, peak=base.predicted_nf_peak,
               snr_base=base.snr_linear, slope=cfg.asnn_slope, intercept=cfg.asnn_intercept)


def estimate_acldr(img: Raster, cfg: EstimatorConfig = DEFAULT_CONFIG) -> SnrEstimate:
    """Autoregressive backward extrapolation of the autocorrelation tail.

    The recursion runs on mean-removed samples (the squared mean dominates raw
    products and pins the first reflection coefficient onto the unit circle)
    from the average of the two axis profiles.  If the sampled tail is still
    too noisy for the requested order, the order is stepped down before giving
    up; the effective order is recorded in the diagnostics.
    """
    order = cfg.acldr_order
    curve = _xy_mean_curve(img, order + 1)
    mu2 = curve.mean**2
    tail = np.array([curve.value(k) - mu2 for k in range(1, order + 2)])
    if tail[0] <= 0.0:
        raise DegenerateError("no covariance structure above the squared mean")
    last_error: EstimatorError | None = None
    for effective in range(order, 0, -1):
        try:
            cov_peak, diag = acldr_peak(tail[: effective + 1], effective)
        except NonStationaryError as exc:
            last_error = exc
            continue
        peak = cov_peak + mu2
        snr = snr_from_peaks(curve.value(0), peak, curve.mean)
        return _ok("acldr", snr, peak=peak, order=effective, **diag)
    raise last_error if last_error is not None else DegenerateError("empty tail")


def estimate_chillsrsnr(img: Raster, cfg: EstimatorConfig = DEFAULT_CONFIG) -> SnrEstimate:
    """Cubic Hermite spline extrapolation with an optional quadratic correction."""
    curve = autocorrelation(img, max_lag=cfg.chillsr_points, axis="x")
    peak, diag = chillsr_peak(curve, cfg)
    raw = snr_from_peaks(curve.value(0), peak, curve.mean)
    qa, qb, qc = cfg.chillsr_correction
    corrected = qa * raw * raw + qb * raw + qc
    if corrected <= 0.0:
        raise DegenerateError(f"corrected SNR {corrected} is not positive")
    return _ok("chillsr", corrected, peak=peak, raw_snr=raw,
               correction=list(cfg.chillsr_correction), **diag)


def snr_from_correlation(rho: float) -> float:
    """Two-image SNR from the cross-correlation coefficient, rho / (1 - rho)."""
    if rho <= 0.0:
        raise NonpositiveCorrelationError(f"correlation {rho} is not positive")
    if rho >= 1.0:
        return math.inf
    return rho / (1.0 - rho)


def estimate_frank_alali(a: Raster, b: Raster) -> SnrEstimate:
    """Two-acquisition estimate from the zero-offset correlation coefficient.

    Assumes the two images carry the same signal with uncorrelated zero-mean
    noise and are already aligned.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise DomainError("images must have equal dimensions")
    xa, xb = a.data, b.data
    mu_a, mu_b = float(xa.mean()), float(xb.mean())
    sd_a, sd_b = float(xa.std()), float(xb.std())
    if sd_a == 0.0 or sd_b == 0.0:
        raise DegenerateError("an input image has zero variance")
    rho = (float(np.mean(xa * xb)) - mu_a * mu_b) / (sd_a * sd_b)
    if rho >= 1.0:
        return _infinite("frank_alali", rho=rho)
    snr = snr_from_correlation(rho)
    return _ok("frank_alali", snr, rho=rho)


def _centered_roi(data: np.ndarray, size: int, x_shift: int = 0) -> np.ndarray:
    h, w = data.shape
    y0 = (h - size) // 2
    x0 = (w - size) // 2 + x_shift
    x0 = min(max(x0, 0), w - size)
    return data[y0 : y0 + size, x0 : x0 + size]


def _smart_roi_size(img: Raster, cfg: EstimatorConfig) -> int:
    if cfg.smart_roi is not None:
        size = cfg.smart_roi
    else:
        size = 1
        while size * 2 + cfg.smart_shift <= min(img.width, img.height):
            size *= 2
    if size < 64:
        raise DomainError("the region of interest must be at least 64x64")
    if size + cfg.smart_shift > min(img.width, img.height):
        raise DomainError("image too small for the region size plus shift")
    return size


def estimate_smart(img: Raster, second: Raster | None = None,
                   cfg: EstimatorConfig = DEFAULT_CONFIG) -> SnrEstimate:
    """Region-based cross-correlation estimate with alignment recovery.

    Two equal regions of interest are taken: one centered in ``img`` and one
    shifted by ``cfg.smart_shift`` pixels along x, cut from ``second`` when a
    second acquisition is supplied and from ``img`` itself otherwise.  The
    cross-correlation surface locates the region displacement and measures
    resolution as the peak's full width at half maximum.

    With a second acquisition the region is re-extracted at the recovered
    alignment and the correlation coefficient feeds rho / (1 - rho), like the
    two-acquisition method but tolerant of a known region offset.  In the
    single-image form the regions share pixels, which makes the aligned
    correlation trivially 1, so the estimate instead reads signal and noise
    energy off the surface profile: the sharp single-pixel peak carries the
    noise energy and the unit-offset neighbors predict the noise-free peak.
    """
    size = _smart_roi_size(img, cfg)
    shift = cfg.smart_shift
    source = second if second is not None else img
    if (source.width, source.height) != (img.width, img.height):
        raise DomainError("images must have equal dimensions")

    roi1 = _centered_roi(img.data, size)
    roi2 = _centered_roi(source.data, size, x_shift=shift)
    ccf = cross_correlate(
        raster_from_array(roi1, img.bit_depth), raster_from_array(roi2, img.bit_depth)
    )
    # content displacement -> region offset convention (region 2 sits +shift in x)
    offset = (-ccf.peak_offset[0], -ccf.peak_offset[1])

    roi_power = float(np.mean(roi1 * roi1))
    if ccf.peak_value <= ccf.background + 1e-12 * max(roi_power, 1.0):
        raise NoPeakError("no cross-correlation peak above background")

    diag = {"peak_offset": offset, "fwhm": ccf.fwhm, "roi_size": size, "shift": shift}

    if second is not None:
        aligned = _centered_roi(second.data, size, x_shift=shift - offset[0])
        rho = _pearson(roi1, aligned)
        if rho >= 1.0:
            return _infinite("smart", **diag, rho=rho)
        snr = snr_from_correlation(rho)
        return _ok("smart", snr, rho=rho, **diag)

    peak_c, nf_c, background = _smart_profile_reading(roi1, roi2)
    signal = nf_c - background
    noise = peak_c - nf_c
    # correlation under 2% of the peak height reads as uncorrelated content
    if signal <= 0.02 * (peak_c - background):
        raise NonpositiveCorrelationError("no signal correlation above the surface noise")
    if noise <= 0.0:
        return _infinite("smart", **diag)
    return _ok("smart", signal / noise, peak=nf_c, **diag)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    sa, sb = float(a.std()), float(b.std())
    if sa == 0.0 or sb == 0.0:
        raise DegenerateError("a region has zero variance")
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def _ccf_surface(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    xa = a - a.mean()
    xb = b - b.mean()
    return np.fft.ifft2(np.conj(np.fft.fft2(xa)) * np.fft.fft2(xb)).real / xa.size


def _smart_profile_reading(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    surface = _ccf_surface(a, b)
    h, w = surface.shape
    my, mx = np.unravel_index(int(np.argmax(surface)), surface.shape)
    peak = float(surface[my, mx])
    # 2-D unit-offset average, the surface analog of the nearest-offset rule
    nf = 0.25 * float(
        surface[my, (mx + 1) % w]
        + surface[my, (mx - 1) % w]
        + surface[(my + 1) % h, mx]
        + surface[(my - 1) % h, mx]
    )
    mask = np.ones_like(surface, dtype=bool)
    ys = (np.arange(my - 2, my + 3)) % h
    xs = (np.arange(mx - 2, mx + 3)) % w
    mask[np.ix_(ys, xs)] = False
    background = float(np.median(surface[mask]))
    return peak, nf, background


def estimate_all(img: Raster, cfg: EstimatorConfig = DEFAULT_CONFIG,
                 second: Raster | None = None) -> dict[str, SnrEstimate]:
    """Run every applicable technique; failures become per-method statuses."""
    runners = {
        "nn": lambda: estimate_nn(img, cfg),
        "fol": lambda: estimate_fol(img, cfg),
        "lsr": lambda: estimate_lsr(img, cfg),
        "nllsr": lambda: estimate_nllsr(img, cfg),
        "asnn": lambda: estimate_asnn(img, cfg),
        "acldr": lambda: estimate_acldr(img, cfg),
        "chillsr": lambda: estimate_chillsrsnr(img, cfg),
        "smart": lambda: estimate_smart(img, second, cfg),
        "frank_alali": (
            (lambda: estimate_frank_alali(img, second)) if second is not None else None
        ),
    }
    results: dict[str, SnrEstimate] = {}
    for method, run in runners.items():
        if run is None:
            results[method] = SnrEstimate(method=method, status="not_applicable")
            continue
        try:
            results[method] = run()
        except EstimatorError as exc:
            results[method] = SnrEstimate(
                method=method, status=exc.status, diagnostics={"detail": str(exc)}
            )
        except (DomainError, SingularFitError) as exc:
            results[method] = SnrEstimate(
                method=method, status="error", diagnostics={"detail": str(exc)}
            )
    return results


def fit_quadratic_correction(raw: np.ndarray, actual: np.ndarray) -> tuple[float, float, float]:
    """Least-squares quadratic mapping raw -> actual for offline calibration."""
    raw = np.asarray(raw, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if raw.size < 3 or raw.size != actual.size:
        raise DomainError("need at least three (raw, actual) pairs")
    design = np.column_stack([raw**2, raw, np.ones_like(raw)])
    coeffs, *_ = np.linalg.lstsq(design, actual, rcond=None)
    return float(coeffs[0]), float(coeffs[1]), float(coeffs[2])

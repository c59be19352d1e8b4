"""Auto- and cross-correlation machinery.

Autocorrelation values follow the raw-product convention: r(k) is the mean of
f(i,j) * f(i,j+k) over the valid overlap (no wraparound), so r(0) is the mean
square intensity and r(0) - mean^2 equals the population variance.  A periodic
(circular, FFT-backed) variant exists for spectrum-domain parity checks.

The single-image SNR identity implemented by :func:`snr_from_peaks` reads the
signal energy as (noise-free peak - mean^2) and the noise energy as
(noisy peak - noise-free peak).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DomainError, NonpositiveSignalError
from .raster import Raster

AXES = ("x", "y", "radial")


@dataclass(frozen=True)
class AcfCurve:
    """A 1-D autocorrelation profile r(k) for integer lags 0..K."""

    lags: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    mean: float = 0.0
    axis: str = "x"

    def __post_init__(self):
        lags = np.ascontiguousarray(np.asarray(self.lags, dtype=np.int64))
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if lags.shape != values.shape or lags.ndim != 1:
            raise DomainError("lags and values must be 1-D arrays of equal length")
        lags.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)

    def value(self, lag: int) -> float:
        idx = np.nonzero(self.lags == lag)[0]
        if idx.size == 0:
            raise DomainError(f"lag {lag} not present in curve")
        return float(self.values[idx[0]])


@dataclass(frozen=True)
class CcfResult:
    """Peak geometry of a cross-correlation surface."""

    peak_offset: tuple[int, int]  # (dx, dy)
    peak_value: float
    background: float
    fwhm: float
    correlation: float


def _acf_lag_x(x: np.ndarray, k: int) -> float:
    if k == 0:
        return float(np.mean(x * x))
    return float(np.mean(x[:, :-k] * x[:, k:]))


def _acf_lag_y(x: np.ndarray, k: int) -> float:
    if k == 0:
        return float(np.mean(x * x))
    return float(np.mean(x[:-k, :] * x[k:, :]))


def _acf_offset(x: np.ndarray, dx: int, dy: int) -> float:
    """Valid-overlap mean product at an arbitrary 2-D offset (dy >= 0)."""
    h, w = x.shape
    if dx >= 0:
        a = x[: h - dy, : w - dx]
        b = x[dy:, dx:]
    else:
        a = x[: h - dy, -dx:]
        b = x[dy:, : w + dx]
    return float(np.mean(a * b))


def autocorrelation(r: Raster, max_lag: int, axis: str = "x",
                    periodic: bool = False) -> AcfCurve:
    """Raw-product ACF profile along an axis, normalized per-lag by overlap count.

    ``axis`` is "x" (offset across columns at zero row offset, the default
    profile), "y", or "radial" (average of the 2-D surface over annuli of
    rounded integer radius).  ``periodic=True`` switches to the circular ACF
    computed in the spectrum domain (x/y axes only), which pairs with the
    direct sum only on wraparound-friendly content and exists for parity tests.
    """
    if axis not in AXES:
        raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
    if max_lag < 0 or max_lag >= min(r.width, r.height) / 2:
        raise DomainError(
            f"max_lag {max_lag} must satisfy 0 <= max_lag < min(width, height)/2"
        )
    x = r.data
    mean = float(x.mean())
    lags = np.arange(max_lag + 1)

    if periodic:
        if axis == "radial":
            raise DomainError("periodic mode supports x and y axes only")
        spec = np.fft.fft2(x)
        surface = np.fft.ifft2(spec * np.conj(spec)).real / x.size
        values = surface[0, : max_lag + 1] if axis == "x" else surface[: max_lag + 1, 0]
        return AcfCurve(lags=lags, values=values.copy(), mean=mean, axis=axis)

    if axis == "x":
        values = np.array([_acf_lag_x(x, int(k)) for k in lags])
    elif axis == "y":
        values = np.array([_acf_lag_y(x, int(k)) for k in lags])
    else:
        sums = np.zeros(max_lag + 1)
        counts = np.zeros(max_lag + 1)
        for dy in range(0, max_lag + 1):
            for dx in range(-max_lag, max_lag + 1):
                if dy == 0 and dx < 0:
                    continue  # mirror of (dx >= 0, 0): same value by symmetry
                radius = int(round(math.hypot(dx, dy)))
                if radius > max_lag:
                    continue
                sums[radius] += _acf_offset(x, dx, dy)
                counts[radius] += 1
        values = sums / counts
    return AcfCurve(lags=lags, values=values, mean=mean, axis=axis)


def snr_db(snr_linear: float) -> float:
    """Decibel companion of a linear power-ratio SNR (10 log10)."""
    return 10.0 * math.log10(snr_linear)


def snr_from_peaks(r0: float, r_nf: float, mean: float) -> float:
    """Single-image SNR from the noisy peak, predicted noise-free peak, and mean.

    Returns (r_nf - mean^2) / (r0 - r_nf).  Raises a typed error when the
    predicted peak reaches the noisy peak (no measurable noise) or fails to
    clear the squared mean (nonpositive signal energy).
    """
    mu2 = mean * mean
    if r0 - r_nf <= 1e-12 * max(abs(r0), 1.0):
        raise DegenerateError(
            f"predicted noise-free peak {r_nf} at/above noisy peak {r0}"
        )
    if r_nf <= mu2:
        raise NonpositiveSignalError(
            f"predicted noise-free peak {r_nf} does not exceed squared mean {mu2}"
        )
    return (r_nf - mu2) / (r0 - r_nf)


def export_acf_csv(curve: AcfCurve, path) -> None:
    """Two-column CSV (lag, value) with a header comment recording mean and axis."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# semsnr-csv v1 acf mean={float(curve.mean)!r} axis={curve.axis}\n")
        fh.write("lag,value\n")
        for lag, value in zip(curve.lags, curve.values):
            fh.write(f"{int(lag)},{float(value)!r}\n")


def _profile_fwhm(profile: np.ndarray, peak_idx: int, peak: float, background: float) -> float:
    """Full width at half maximum of a line profile, linear interpolation at crossings."""
    half = background + 0.5 * (peak - background)
    n = profile.size

    def crossing(direction: int) -> float:
        prev = peak
        for step in range(1, n):
            idx = peak_idx + direction * step
            if idx < 0 or idx >= n:
                return float(step - 1) + 0.5  # ran off the profile edge
            cur = profile[idx]
            if cur < half:
                # linear interpolation between the previous (>= half) sample and this one
                frac = (prev - half) / (prev - cur)
                return float(step - 1) + frac
            prev = cur
        return float(n - 1)

    width = crossing(+1) + crossing(-1)
    return max(width, 1.0)


def cross_correlate(a: Raster, b: Raster) -> CcfResult:
    """Spectrum-domain cross-correlation with peak location, FWHM, and correlation.

    The surface is the circular cross-correlation of the mean-subtracted
    images (inverse transform of conj(F) * G), scaled to mean-product units.
    The reported correlation is the zero-offset correlation coefficient after
    circularly aligning ``b`` by the recovered peak offset.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise DomainError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    if a.width < 16 or a.height < 16:
        raise DomainError("cross-correlation needs at least 16x16 images")

    xa = a.data - a.data.mean()
    xb = b.data - b.data.mean()
    fa = np.fft.fft2(xa)
    fb = np.fft.fft2(xb)
    surface = np.fft.ifft2(np.conj(fa) * fb).real / xa.size

    h, w = surface.shape
    peak_flat = int(np.argmax(surface))
    my, mx = np.unravel_index(peak_flat, surface.shape)
    dx = int(mx) - w if mx > w // 2 else int(mx)
    dy = int(my) - h if my > h // 2 else int(my)
    peak = float(surface[my, mx])

    mask = np.ones_like(surface, dtype=bool)
    ys = (np.arange(my - 2, my + 3)) % h
    xs = (np.arange(mx - 2, mx + 3)) % w
    mask[np.ix_(ys, xs)] = False
    background = float(np.median(surface[mask]))

    profile = np.roll(surface[my, :], w // 2 - mx)
    fwhm = _profile_fwhm(profile, w // 2, peak, background)

    aligned = np.roll(b.data, (-dy, -dx), axis=(0, 1))
    sa = float(np.std(a.data))
    sb = float(np.std(aligned))
    if sa == 0.0 or sb == 0.0:
        rho = 0.0
    else:
        rho = float(np.mean((a.data - a.data.mean()) * (aligned - aligned.mean())) / (sa * sb))
    rho = max(-1.0, min(1.0, rho))

    return CcfResult(
        peak_offset=(dx, dy),
        peak_value=peak,
        background=background,
        fwhm=fwhm,
        correlation=rho,
    )

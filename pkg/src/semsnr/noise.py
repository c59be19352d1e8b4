"""Synthetic SEM acquisitions with an exact ground-truth SNR oracle.

Emission models realized per pixel, all driven by a counter-based RNG so a
recipe (including its seed) fully determines the output:

* ``poisson-pe``      primary-electron counts N ~ Poisson(dose)
* ``poisson-se``      secondary emission as a compound Poisson: each of the
                      N ~ Poisson(dose) primaries releases a Poisson(delta)
                      number of secondaries, so the pixel count is
                      Poisson(delta * N) given N.  An optional variance
                      inflation k > 1 switches the per-pixel draw to a
                      negative binomial with the same mean and variance
                      k * delta * dose, covering materials whose yield
                      fluctuates more than Poisson.
* ``binomial-bse``    backscatter conversion: Binomial(N, eta) with
                      N ~ Poisson(dose)
* ``additive-gaussian`` plain additive white Gaussian noise on the clean plane
* ``none``            noiseless pass-through

Counts are mapped to intensity through the detector gain and DC offset, then
quantized at the recipe's storage bit depth.  The oracle SNR is defined on the
realized pair: signal energy = population variance of the clean plane, noise
energy = population variance of (noisy - clean).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .raster import Raster, quantize

ELECTRON_CHARGE = 1.602176634e-19  # coulombs, 2019 SI exact value

EMISSION_MODELS = ("none", "poisson-pe", "poisson-se", "binomial-bse", "additive-gaussian")


@dataclass(frozen=True)
class NoiseRecipe:
    """Full specification of one synthetic acquisition.

    ``dose_map`` holds the mean number of primary electrons per pixel and must
    be strictly positive everywhere.  ``yield_inflation`` is the non-Poisson
    variance factor k >= 1; bookkeeping uses b = k/delta.
    """

    dose_map: np.ndarray = field(repr=False)
    emission_model: str = "poisson-pe"
    se_yield: float = 0.16
    bse_yield: float = 0.30
    yield_inflation: float = 1.0
    gaussian_sigma: float = 0.0
    detector_gain: float = 1.0
    dc_offset: float = 0.0
    seed: int = 0
    bit_depth: int = 16

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.dose_map, dtype=np.float64))
        if arr.ndim != 2:
            raise DomainError("dose_map must be 2-D")
        if not np.all(np.isfinite(arr)) or arr.min() <= 0.0:
            raise DomainError("dose_map must be finite and positive everywhere")
        arr.flags.writeable = False
        object.__setattr__(self, "dose_map", arr)
        if self.emission_model not in EMISSION_MODELS:
            raise DomainError(
                f"unknown emission_model {self.emission_model!r}; expected one of {EMISSION_MODELS}"
            )
        if not (0.0 < self.se_yield <= 1.0):
            raise DomainError("se_yield must be in (0, 1]")
        if not (0.0 <= self.bse_yield <= 1.0):
            raise DomainError("bse_yield must be in [0, 1]")
        if not (1.0 <= self.yield_inflation <= 2.0):
            raise DomainError("yield_inflation must be in [1, 2]")
        if self.gaussian_sigma < 0.0:
            raise DomainError("gaussian_sigma must be nonnegative")
        if self.detector_gain <= 0.0:
            raise DomainError("detector_gain must be positive")
        if self.dc_offset < 0.0:
            raise DomainError("dc_offset must be nonnegative")


@dataclass(frozen=True)
class GroundTruth:
    """A realized (clean, noisy) pair and its exact oracle SNR."""

    clean: Raster
    noisy: Raster
    true_snr: float
    signal_energy: float
    noise_energy: float


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; streams derived from (seed, stream) are independent."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, stream))))


def _expected_counts(recipe: NoiseRecipe) -> np.ndarray:
    dose = recipe.dose_map
    if recipe.emission_model == "poisson-se":
        return recipe.se_yield * dose
    if recipe.emission_model == "binomial-bse":
        return recipe.bse_yield * dose
    return dose


def simulate(recipe: NoiseRecipe) -> GroundTruth:
    """Realize one acquisition; deterministic under a fixed recipe."""
    rng = rng_for(recipe.seed)
    dose = recipe.dose_map
    model = recipe.emission_model

    if model == "none":
        counts = dose
    elif model == "poisson-pe":
        counts = rng.poisson(dose).astype(np.float64)
    elif model == "poisson-se":
        n_pe = rng.poisson(dose).astype(np.float64)
        mean_se = recipe.se_yield * n_pe
        k = recipe.yield_inflation
        if k == 1.0:
            counts = rng.poisson(mean_se).astype(np.float64)
        else:
            # negative binomial with mean m and variance k*m (only where m > 0)
            counts = np.zeros_like(mean_se)
            hot = mean_se > 0.0
            m = mean_se[hot]
            r = m / (k - 1.0)
            counts[hot] = rng.negative_binomial(r, r / (r + m)).astype(np.float64)
    elif model == "binomial-bse":
        n_pe = rng.poisson(dose)
        counts = rng.binomial(n_pe, recipe.bse_yield).astype(np.float64)
    elif model == "additive-gaussian":
        counts = dose + rng.normal(0.0, recipe.gaussian_sigma, size=dose.shape)
    else:  # pragma: no cover - guarded by NoiseRecipe
        raise DomainError(f"unknown emission model {model!r}")

    gain, offset = recipe.detector_gain, recipe.dc_offset
    clean_plane = gain * _expected_counts(recipe) + offset
    noisy_plane = gain * counts + offset

    clean, _ = quantize(clean_plane, recipe.bit_depth)
    noisy, _ = quantize(noisy_plane, recipe.bit_depth)

    signal_energy = float(np.var(clean.data))
    diff = noisy.data - clean.data
    noise_energy = float(np.var(diff))
    true_snr = math.inf if noise_energy == 0.0 else signal_energy / noise_energy
    return GroundTruth(
        clean=clean,
        noisy=noisy,
        true_snr=true_snr,
        signal_energy=signal_energy,
        noise_energy=noise_energy,
    )


def shot_noise_power(i_pe: float, delta_f: float) -> float:
    """Mean-square shot noise current 2 e I df for a beam current and bandwidth."""
    if i_pe <= 0.0:
        raise DomainError("beam current must be positive")
    if delta_f <= 0.0:
        raise DomainError("bandwidth must be positive")
    return 2.0 * ELECTRON_CHARGE * i_pe * delta_f


def partition_noise_power(gamma: float, se_noise_power: float) -> float:
    """Noise in the transmitted group of a grid with transmission gamma."""
    if not (0.0 <= gamma <= 1.0):
        raise DomainError("transmission must be in [0, 1]")
    if se_noise_power < 0.0:
        raise DomainError("noise power must be nonnegative")
    return gamma**2 * se_noise_power + gamma * (1.0 - gamma) * se_noise_power


def total_se_yield(delta_se1: float, zeta: float) -> float:
    """Total SE yield from the direct yield plus the backscatter-generated share."""
    if delta_se1 < 0.0:
        raise DomainError("delta_se1 must be nonnegative")
    if not (0.0 <= zeta <= 1.0):
        raise DomainError("zeta must be in [0, 1]")
    return delta_se1 * (1.0 + zeta)


# --- flat key/value recipe serialization ------------------------------------

_RECIPE_FLOAT_KEYS = (
    "se_yield",
    "bse_yield",
    "yield_inflation",
    "gaussian_sigma",
    "detector_gain",
    "dc_offset",
    "dose_scale",
    "dose_offset",
    "dose_constant",
)
_RECIPE_INT_KEYS = ("seed", "bit_depth", "width", "height")


def recipe_to_text(recipe: NoiseRecipe, dose_pgm: str | None = None,
                   dose_scale: float = 1.0, dose_offset: float = 0.0) -> str:
    """Serialize a recipe as flat ``key = value`` lines.

    The dose map is recorded either as ``dose_constant`` (uniform maps) or as
    an affine transform of a 16-bit PGM named by ``dose_pgm``.
    """
    h, w = recipe.dose_map.shape
    lines = [
        f"emission_model = {recipe.emission_model}",
        f"se_yield = {recipe.se_yield!r}",
        f"bse_yield = {recipe.bse_yield!r}",
        f"yield_inflation = {recipe.yield_inflation!r}",
        f"gaussian_sigma = {recipe.gaussian_sigma!r}",
        f"detector_gain = {recipe.detector_gain!r}",
        f"dc_offset = {recipe.dc_offset!r}",
        f"seed = {recipe.seed}",
        f"bit_depth = {recipe.bit_depth}",
        f"width = {w}",
        f"height = {h}",
    ]
    flat = recipe.dose_map.ravel()
    if dose_pgm is None:
        if not np.all(flat == flat[0]):
            raise DomainError("non-constant dose map needs a dose_pgm reference")
        lines.append(f"dose_constant = {float(flat[0])!r}")
    else:
        lines.append(f"dose_pgm = {dose_pgm}")
        lines.append(f"dose_scale = {dose_scale!r}")
        lines.append(f"dose_offset = {dose_offset!r}")
    return "\n".join(lines) + "\n"


def parse_recipe_text(text: str) -> dict:
    """Parse the flat key/value recipe format into a typed dict."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"recipe line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _RECIPE_FLOAT_KEYS:
            out[key] = float(value)
        elif key in _RECIPE_INT_KEYS:
            out[key] = int(value)
        elif key in ("emission_model", "dose_pgm"):
            out[key] = value
        else:
            raise DomainError(f"recipe line {lineno}: unknown key {key!r}")
    return out


def recipe_from_text(text: str, dose_loader=None) -> NoiseRecipe:
    """Rebuild a recipe; ``dose_loader(name)`` must return the dose-basis Raster."""
    kv = parse_recipe_text(text)
    shape = (kv.pop("height"), kv.pop("width"))
    if "dose_constant" in kv:
        dose = np.full(shape, kv.pop("dose_constant"))
    else:
        if dose_loader is None:
            raise DomainError("recipe references a dose PGM but no loader was given")
        basis = dose_loader(kv.pop("dose_pgm"))
        dose = kv.pop("dose_scale") * basis.data + kv.pop("dose_offset")
    return NoiseRecipe(dose_map=dose, **kv)

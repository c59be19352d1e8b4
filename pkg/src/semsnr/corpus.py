"""Deterministic synthetic corpora with per-image oracle SNR.

A corpus directory holds, per image id:

* ``<id>.scene.pgm``   16-bit basis pattern the dose map is an affine map of
* ``<id>.recipe.txt``  flat key/value acquisition recipe (regenerates exactly)
* ``<id>.clean.pgm``   expected (noise-free) acquisition
* ``<id>.noisy.pgm``   realized noisy acquisition

plus ``truth.csv`` (one oracle row per image) and ``manifest.txt`` (flat
key/value run description).  Everything is reproducible from the manifest:
per-image RNG streams derive from (corpus seed, image index).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .denoise import gaussian_blur
from .errors import ConfigError, DataError
from .noise import (
    GroundTruth,
    NoiseRecipe,
    recipe_from_text,
    recipe_to_text,
    rng_for,
    simulate,
)
from .raster import Raster, load_pgm, quantize, save_pgm

SCENE_KINDS = ("ar_field", "spectral", "blobs", "ramp", "constant")

CSV_MAGIC = "# semsnr-csv v1"

TRUTH_FIELDS = (
    "image_id",
    "seed",
    "model",
    "delta",
    "eta",
    "gain",
    "idc",
    "signal_energy",
    "noise_energy",
    "true_snr",
    "scene",
    "snr_target",
)


@dataclass(frozen=True)
class SceneSpec:
    """A reproducible scene pattern, normalized to [0, 1].

    ``ar_field`` is first-order-autoregressive texture (exponential-family
    correlation, shape varies between realizations).  ``spectral`` synthesizes
    a random-phase field with a deterministic amplitude spectrum matched to an
    exponential correlation of ``corr_length`` plus a white ``spectral_nugget``
    share, so every realization shares essentially the same autocorrelation
    shape.
    """

    kind: str = "ar_field"
    width: int = 128
    height: int = 128
    corr_length: float = 8.0  # e-folding length of the correlation
    spectral_nugget: float = 0.012  # white (per-pixel) share of the spectral target
    n_blobs: int = 12
    blob_sigma: float = 6.0

    def __post_init__(self):
        if self.kind not in SCENE_KINDS:
            raise ConfigError(f"unknown scene kind {self.kind!r}; expected one of {SCENE_KINDS}")
        if self.width < 2 or self.height < 2:
            raise ConfigError("scene must be at least 2x2")
        if self.corr_length <= 0.0 or self.blob_sigma <= 0.0 or self.n_blobs < 1:
            raise ConfigError("scene parameters must be positive")
        if not (0.0 <= self.spectral_nugget < 1.0):
            raise ConfigError("spectral_nugget must be in [0, 1)")


def _ar1_both_axes(noise: np.ndarray, phi: float) -> np.ndarray:
    out = noise.copy()
    for i in range(1, out.shape[0]):
        out[i] += phi * out[i - 1]
    out = out.T.copy()
    for i in range(1, out.shape[0]):
        out[i] += phi * out[i - 1]
    return out.T


def _spectral_field(h: int, w: int, corr_length: float, nugget: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Random-phase field with a deterministic, estimator-friendly correlation.

    The target circular autocorrelation is (1 - nugget) * exp(-r / corr_length)
    plus a white nugget at zero offset (per-pixel fine detail).  Both
    components have nonnegative power spectra, so the amplitude spectrum is
    exact and every realization shares the same sample autocorrelation shape;
    only the phases are random.
    """
    dy = np.minimum(np.arange(h), h - np.arange(h))[:, None]
    dx = np.minimum(np.arange(w), w - np.arange(w))[None, :]
    radius = np.hypot(dy, dx)
    smooth_psd = np.fft.fft2(np.exp(-radius / corr_length)).real
    psd = (1.0 - nugget) * np.maximum(smooth_psd, 0.0) + nugget
    amplitude = np.sqrt(psd)
    amplitude[0, 0] = 0.0  # mean handled by normalization
    # Hermitian-symmetric unit phases from a real white field keep the
    # synthesized field real and its amplitude spectrum exactly on target.
    white = np.fft.fft2(rng.standard_normal((h, w)))
    magnitude = np.abs(white)
    phases = np.where(magnitude > 0.0, white / np.where(magnitude > 0.0, magnitude, 1.0), 1.0)
    field_ = np.fft.ifft2(amplitude * phases).real
    # Equalize row and column means: overlap windows of the lagged product
    # sums then share the same mean, which keeps sample autocorrelation tails
    # stable when the intensity offset dwarfs the contrast.
    field_ = field_ - field_.mean(axis=0, keepdims=True)
    field_ = field_ - field_.mean(axis=1, keepdims=True)
    return field_


def make_scene(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    """Render the scene pattern into [0, 1]; deterministic given the generator."""
    h, w = spec.height, spec.width
    if spec.kind == "constant":
        return np.full((h, w), 0.5)
    if spec.kind == "ramp":
        xs = np.linspace(0.0, 1.0, w)[None, :]
        ys = np.sin(np.linspace(0.0, 4.0 * math.pi, h))[:, None]
        field_ = xs + 0.25 * (ys + 1.0)
    elif spec.kind == "ar_field":
        phi = math.exp(-1.0 / spec.corr_length)
        field_ = _ar1_both_axes(rng.standard_normal((h, w)), phi)
    elif spec.kind == "spectral":
        field_ = _spectral_field(h, w, spec.corr_length, spec.spectral_nugget, rng)
    else:  # blobs
        field_ = np.zeros((h, w))
        ys, xs = np.mgrid[0:h, 0:w]
        for _ in range(spec.n_blobs):
            cy, cx = rng.uniform(0, h), rng.uniform(0, w)
            amp = rng.uniform(0.3, 1.0)
            field_ += amp * np.exp(
                -((ys - cy) ** 2 + (xs - cx) ** 2) / (2.0 * spec.blob_sigma**2)
            )
        field_ = gaussian_blur(field_, 1.0)
    lo, hi = float(field_.min()), float(field_.max())
    if hi - lo < 1e-12:
        return np.full((h, w), 0.5)
    return (field_ - lo) / (hi - lo)


@dataclass(frozen=True)
class CorpusSpec:
    """Template for a batch of synthetic acquisitions.

    For the additive-gaussian model ``snr_targets`` states the intended
    signal/noise variance ratio per image; the exact realized oracle is
    recorded in truth.csv.  Counting models instead scale the scene into
    [dose_min, dose_max] electrons per pixel.
    """

    scene: SceneSpec = field(default_factory=SceneSpec)
    model: str = "additive-gaussian"
    snr_targets: tuple[float, ...] = (1.0, 5.0, 20.0)
    seeds_per_level: int = 3
    base_seed: int = 0
    dose_min: float = 50.0
    dose_max: float = 400.0
    se_yield: float = 0.16
    bse_yield: float = 0.30
    yield_inflation: float = 1.0
    detector_gain: float = 1.0
    dc_offset: float = 200.0
    bit_depth: int = 16

    def image_count(self) -> int:
        return len(self.snr_targets) * self.seeds_per_level


@dataclass(frozen=True)
class CorpusImage:
    image_id: str
    clean: Raster
    noisy: Raster
    truth: dict


def _scene_to_raster(scene01: np.ndarray) -> Raster:
    basis, _ = quantize(scene01 * 65535.0, 16)
    return basis


def build_recipe(spec: CorpusSpec, scene01: np.ndarray, seed: int,
                 snr_target: float | None) -> tuple[NoiseRecipe, float, float]:
    """Instantiate a recipe for one image; returns (recipe, dose_scale, dose_offset).

    The dose map is an affine map of the 16-bit quantized scene basis so that a
    serialized recipe regenerates the acquisition exactly.
    """
    basis = _scene_to_raster(scene01).data  # integers 0..65535
    dose_scale = (spec.dose_max - spec.dose_min) / 65535.0
    dose_offset = spec.dose_min
    dose = dose_scale * basis + dose_offset
    sigma = 0.0
    if spec.model == "additive-gaussian":
        if snr_target is None or snr_target <= 0.0:
            raise ConfigError("the additive-gaussian model needs a positive snr target")
        clean_plane = spec.detector_gain * dose + spec.dc_offset
        sigma_intensity = math.sqrt(float(np.var(clean_plane)) / snr_target)
        sigma = sigma_intensity / spec.detector_gain  # recipe sigma acts on counts
    return (
        NoiseRecipe(
            dose_map=dose,
            emission_model=spec.model,
            se_yield=spec.se_yield,
            bse_yield=spec.bse_yield,
            yield_inflation=spec.yield_inflation,
            gaussian_sigma=sigma,
            detector_gain=spec.detector_gain,
            dc_offset=spec.dc_offset,
            seed=seed,
            bit_depth=spec.bit_depth,
        ),
        dose_scale,
        dose_offset,
    )


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_truth_csv(rows: list[dict], path: Path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(CSV_MAGIC + "\n")
        writer = csv.DictWriter(fh, fieldnames=TRUTH_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _format_value(row[k]) for k in TRUTH_FIELDS})


def read_truth_csv(path: Path) -> list[dict]:
    if not path.exists():
        raise DataError(f"missing truth file {path}")
    with open(path, newline="", encoding="ascii") as fh:
        first = fh.readline()
        if not first.startswith(CSV_MAGIC):
            raise DataError(f"{path}: missing '{CSV_MAGIC}' header line")
        rows = []
        for row in csv.DictReader(fh):
            parsed = dict(row)
            for key in ("delta", "eta", "gain", "idc", "signal_energy",
                        "noise_energy", "true_snr", "snr_target"):
                parsed[key] = float(row[key])
            parsed["seed"] = int(row["seed"])
            rows.append(parsed)
        return rows


def iter_corpus(spec: CorpusSpec):
    """Yield (image_id, scene01, recipe, ground_truth, truth_row) in manifest order.

    Per-image randomness derives from (base_seed, image index), so the corpus
    is reproducible image by image and safe to generate in parallel.
    """
    index = 0
    for target in spec.snr_targets:
        for _ in range(spec.seeds_per_level):
            image_id = f"img{index:04d}"
            stream = rng_for(spec.base_seed, index)
            scene01 = make_scene(spec.scene, stream)
            seed = int(np.random.SeedSequence((spec.base_seed, index)).generate_state(1)[0])
            recipe, dose_scale, dose_offset = build_recipe(
                spec, scene01, seed, target if spec.model == "additive-gaussian" else None
            )
            gt = simulate(recipe)
            row = {
                "image_id": image_id,
                "seed": seed,
                "model": spec.model,
                "delta": spec.se_yield,
                "eta": spec.bse_yield,
                "gain": spec.detector_gain,
                "idc": spec.dc_offset,
                "signal_energy": gt.signal_energy,
                "noise_energy": gt.noise_energy,
                "true_snr": gt.true_snr,
                "scene": spec.scene.kind,
                "snr_target": float(target),
            }
            yield image_id, scene01, (recipe, dose_scale, dose_offset), gt, row
            index += 1


def generate_corpus(spec: CorpusSpec, out_dir) -> list[dict]:
    """Write a full corpus; returns the truth rows in manifest order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    manifest = [
        f"scene_kind = {spec.scene.kind}",
        f"width = {spec.scene.width}",
        f"height = {spec.scene.height}",
        f"model = {spec.model}",
        f"base_seed = {spec.base_seed}",
        f"images = {spec.image_count()}",
    ]
    for image_id, scene01, (recipe, dose_scale, dose_offset), gt, row in iter_corpus(spec):
        scene_name = f"{image_id}.scene.pgm"
        save_pgm(_scene_to_raster(scene01), out / scene_name)
        with open(out / f"{image_id}.recipe.txt", "w", encoding="ascii") as fh:
            fh.write(recipe_to_text(recipe, dose_pgm=scene_name,
                                    dose_scale=dose_scale, dose_offset=dose_offset))
        save_pgm(gt.clean, out / f"{image_id}.clean.pgm")
        save_pgm(gt.noisy, out / f"{image_id}.noisy.pgm")
        rows.append(row)
        manifest.append(f"image = {image_id} seed = {row['seed']} target = {row['snr_target']!r}")
    write_truth_csv(rows, out / "truth.csv")
    (out / "manifest.txt").write_text("\n".join(manifest) + "\n", encoding="ascii")
    return rows


def reference_corpus_spec(base_seed: int = 0, seeds_per_level: int = 9) -> CorpusSpec:
    """The standard oracle benchmark corpus used by the regression suite.

    54 random-phase scenes at 512x512 with a deterministic correlation shape,
    additive white Gaussian noise targeted at six SNR levels.  The scene
    parameters were chosen so every bundled estimator stays on its defined
    branch (finite, non-degenerate) across the whole grid.
    """
    return CorpusSpec(
        scene=SceneSpec(kind="spectral", width=512, height=512,
                        corr_length=110.0, spectral_nugget=0.004),
        model="additive-gaussian",
        snr_targets=(1.0, 2.0, 5.0, 10.0, 20.0, 50.0),
        seeds_per_level=seeds_per_level,
        base_seed=base_seed,
        dose_min=5000.0,
        dose_max=30000.0,
        dc_offset=20000.0,
        bit_depth=16,
    )


def load_corpus(corpus_dir) -> list[CorpusImage]:
    """Load every image listed in a corpus directory's truth file."""
    root = Path(corpus_dir)
    rows = read_truth_csv(root / "truth.csv")
    images = []
    for row in rows:
        image_id = row["image_id"]
        clean_path = root / f"{image_id}.clean.pgm"
        noisy_path = root / f"{image_id}.noisy.pgm"
        if not clean_path.exists() or not noisy_path.exists():
            raise DataError(f"corpus image {image_id} is missing its PGM pair")
        images.append(
            CorpusImage(
                image_id=image_id,
                clean=load_pgm(clean_path),
                noisy=load_pgm(noisy_path),
                truth=row,
            )
        )
    return images


def regenerate_image(corpus_dir, image_id: str) -> GroundTruth:
    """Re-run the persisted recipe for one image (reproducibility check)."""
    root = Path(corpus_dir)
    text = (root / f"{image_id}.recipe.txt").read_text(encoding="ascii")
    recipe = recipe_from_text(text, dose_loader=lambda name: load_pgm(root / name))
    return simulate(recipe)


def second_realization(corpus_dir, image_id: str) -> GroundTruth:
    """Simulate an independent second acquisition of the same scene.

    The recipe is identical except for a derived seed, giving the aligned
    image pair that two-acquisition estimators need.
    """
    root = Path(corpus_dir)
    text = (root / f"{image_id}.recipe.txt").read_text(encoding="ascii")
    recipe = recipe_from_text(text, dose_loader=lambda name: load_pgm(root / name))
    alt_seed = int(np.random.SeedSequence((recipe.seed, 0x5EC0ED)).generate_state(1)[0])
    return simulate(replace(recipe, seed=alt_seed))

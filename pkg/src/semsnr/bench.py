"""Benchmark harness: estimator runs over corpora, sensitivity sweeps, and
denoising comparisons, all reported as versioned CSV files.

Configs are flat key/value text with INI-style sections (hand-editable and
diff-friendly).  Per-image work items may run on a thread pool; results are
always aggregated in manifest order so output is schedule-independent.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .corpus import CSV_MAGIC, CorpusSpec, SceneSpec, load_corpus
from .denoise import FilterSpec, apply_filter, parse_filter_spec
from .errors import ConfigError, DataError
from .estimators import (
    ALL_METHODS,
    DEFAULT_CONFIG,
    SINGLE_IMAGE_METHODS,
    EstimatorConfig,
    SnrEstimate,
    estimate_all,
    estimate_nn,
)
from .noise import NoiseRecipe, simulate
from .raster import Raster, raster_from_array

RESULTS_FIELDS = (
    "image_id",
    "oracle_snr",
    "method",
    "status",
    "snr_linear",
    "snr_db",
    "predicted_nf_peak",
    "rel_error",
    "runtime_ms",
)

SUMMARY_FIELDS = ("method", "n_ok", "n_total", "median_abs_rel_error")

SWEEP_FIELDS = ("parameter", "value", "seed", "method", "estimate", "reference")

DENOISE_FIELDS = (
    "image_id",
    "filter",
    "mse_vs_clean",
    "psnr_db",
    "estimated_noise_variance",
    "snr_before",
    "snr_after",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.10g}"
    return str(value)


def write_csv(path, fieldnames, rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(CSV_MAGIC + "\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in fieldnames})


def read_csv(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing CSV file {path}")
    with open(path, newline="", encoding="ascii") as fh:
        first = fh.readline()
        if not first.startswith(CSV_MAGIC):
            raise DataError(f"{path}: missing '{CSV_MAGIC}' header line")
        return list(csv.DictReader(fh))


# --- config parsing -----------------------------------------------------------


def load_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    return parser


_CORPUS_KEYS = {
    "scene", "width", "height", "corr_length", "n_blobs", "blob_sigma",
    "model", "snr_targets", "seeds_per_level", "base_seed", "dose_min",
    "dose_max", "se_yield", "bse_yield", "yield_inflation", "detector_gain",
    "dc_offset", "bit_depth",
}


def corpus_spec_from_config(cfg: configparser.ConfigParser,
                            seed_override: int | None = None) -> CorpusSpec:
    if not cfg.has_section("corpus"):
        raise ConfigError("config has no [corpus] section")
    section = cfg["corpus"]
    unknown = set(section.keys()) - _CORPUS_KEYS
    if unknown:
        raise ConfigError(f"unknown [corpus] keys: {sorted(unknown)}")
    try:
        scene = SceneSpec(
            kind=section.get("scene", "ar_field"),
            width=section.getint("width", 128),
            height=section.getint("height", 128),
            corr_length=section.getfloat("corr_length", 8.0),
            n_blobs=section.getint("n_blobs", 12),
            blob_sigma=section.getfloat("blob_sigma", 6.0),
        )
        targets = tuple(
            float(v) for v in section.get("snr_targets", "1,5,20").split(",") if v.strip()
        )
        spec = CorpusSpec(
            scene=scene,
            model=section.get("model", "additive-gaussian"),
            snr_targets=targets,
            seeds_per_level=section.getint("seeds_per_level", 3),
            base_seed=seed_override if seed_override is not None
            else section.getint("base_seed", 0),
            dose_min=section.getfloat("dose_min", 50.0),
            dose_max=section.getfloat("dose_max", 400.0),
            se_yield=section.getfloat("se_yield", 0.16),
            bse_yield=section.getfloat("bse_yield", 0.30),
            yield_inflation=section.getfloat("yield_inflation", 1.0),
            detector_gain=section.getfloat("detector_gain", 1.0),
            dc_offset=section.getfloat("dc_offset", 200.0),
            bit_depth=section.getint("bit_depth", 16),
        )
    except ValueError as exc:
        raise ConfigError(f"bad [corpus] value: {exc}") from exc
    from .noise import EMISSION_MODELS

    if spec.model not in EMISSION_MODELS:
        raise ConfigError(
            f"unknown emission model {spec.model!r}; expected one of {EMISSION_MODELS}"
        )
    return spec


def estimator_config_from_config(cfg: configparser.ConfigParser) -> EstimatorConfig:
    if not cfg.has_section("estimate"):
        return DEFAULT_CONFIG
    section = cfg["estimate"]
    kwargs = {}
    for key, getter in (
        ("n_points", section.getint),
        ("lag_start", section.getint),
        ("nllsr_lag_start", section.getint),
        ("acldr_order", section.getint),
        ("chillsr_points", section.getint),
        ("smart_shift", section.getint),
    ):
        if key in section:
            kwargs[key] = getter(key)
    if "epsilon_policy" in section:
        kwargs["epsilon_policy"] = section.get("epsilon_policy")
    return replace(DEFAULT_CONFIG, **kwargs)


def parse_methods(text: str) -> tuple[str, ...]:
    if text.strip() == "all":
        return ALL_METHODS
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in methods if m not in ALL_METHODS]
    if unknown:
        raise ConfigError(f"unknown methods {unknown}; expected a subset of {ALL_METHODS}")
    return methods


# --- estimation runs ----------------------------------------------------------


def _estimate_one(image, methods, est_cfg) -> list[dict]:
    t0 = time.perf_counter()
    results = estimate_all(image.noisy, est_cfg)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0 / max(len(results), 1)
    oracle = image.truth["true_snr"]
    rows = []
    for method in methods:
        est: SnrEstimate = results[method]
        rel = (
            (est.snr_linear - oracle) / oracle
            if est.status == "ok" and oracle > 0 and math.isfinite(oracle)
            else None
        )
        rows.append(
            {
                "image_id": image.image_id,
                "oracle_snr": oracle,
                "method": method,
                "status": est.status,
                "snr_linear": est.snr_linear if est.status in ("ok", "infinite") else None,
                "snr_db": est.snr_db if est.status in ("ok", "infinite") else None,
                "predicted_nf_peak": est.predicted_nf_peak,
                "rel_error": rel,
                "runtime_ms": elapsed_ms,
                "_diagnostics": est.diagnostics,
            }
        )
    return rows


def summarize_results(rows) -> list[dict]:
    by_method: dict[str, list] = {}
    totals: dict[str, int] = {}
    for row in rows:
        method = row["method"]
        totals[method] = totals.get(method, 0) + 1
        if row["status"] == "ok" and row["rel_error"] is not None:
            by_method.setdefault(method, []).append(abs(float(row["rel_error"])))
    summary = []
    for method in sorted(totals):
        errs = by_method.get(method, [])
        summary.append(
            {
                "method": method,
                "n_ok": len(errs),
                "n_total": totals[method],
                "median_abs_rel_error": float(np.median(errs)) if errs else None,
            }
        )
    return summary


def run_estimation(corpus_dir, methods, est_cfg: EstimatorConfig = DEFAULT_CONFIG,
                   out_dir=None, jobs: int = 1) -> tuple[list[dict], list[dict]]:
    """Estimate every corpus image with every requested method.

    Returns (result rows, summary rows) and, when ``out_dir`` is given, writes
    results.csv, summary.csv, and a diagnostics.jsonl sidecar.
    """
    images = load_corpus(corpus_dir)
    methods = tuple(methods)
    for m in methods:
        if m not in ALL_METHODS:
            raise ConfigError(f"unknown method {m!r}")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_image = list(pool.map(lambda im: _estimate_one(im, methods, est_cfg), images))
    else:
        per_image = [_estimate_one(im, methods, est_cfg) for im in images]
    rows = [row for group in per_image for row in group]
    summary = summarize_results(rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "results.csv", RESULTS_FIELDS, rows)
        write_csv(out / "summary.csv", SUMMARY_FIELDS, summary)
        with open(out / "diagnostics.jsonl", "w", encoding="ascii") as fh:
            for row in rows:
                fh.write(json.dumps(
                    {
                        "image_id": row["image_id"],
                        "method": row["method"],
                        "status": row["status"],
                        "diagnostics": _json_safe(row.get("_diagnostics", {})),
                    }
                ) + "\n")
    return rows, summary


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


# --- sweeps --------------------------------------------------------------------

SWEEP_PARAMETERS = ("dose", "dwell", "contrast")


def run_sweep(parameter: str, values, spec: CorpusSpec, methods,
              est_cfg: EstimatorConfig = DEFAULT_CONFIG, seeds: int = 3,
              i_pe: float = 1e-10) -> list[dict]:
    """Synthetic analogs of instrument factor studies.

    ``dose`` scales the mean electrons per pixel (the scan-rate/beam-current
    analog: SNR of a counting acquisition grows like sqrt(dose)).  ``dwell``
    maps dwell seconds to dose through the beam current.  ``contrast`` scales
    all intensities of one fixed acquisition, which leaves autocorrelation
    based estimates unchanged.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep range is empty")
    if sorted(values) != values:
        raise ConfigError("sweep range must be monotone increasing")
    rows: list[dict] = []
    from .noise import ELECTRON_CHARGE

    for value in values:
        if parameter == "dose":
            dose_mid = value
        elif parameter == "dwell":
            dose_mid = i_pe * value / ELECTRON_CHARGE
        else:
            dose_mid = 0.5 * (spec.dose_min + spec.dose_max)
        for seed in range(seeds):
            rows.extend(
                _sweep_point(parameter, value, dose_mid, spec, methods, est_cfg, seed)
            )
    return rows


def _sweep_point(parameter, value, dose_mid, spec, methods, est_cfg, seed) -> list[dict]:
    from .corpus import build_recipe, make_scene
    from .noise import rng_for

    rows = []
    scene_rng = rng_for(spec.base_seed, seed)
    scene01 = make_scene(spec.scene, scene_rng)
    local = spec
    if parameter in ("dose", "dwell"):
        # scale the whole dose range so the configured contrast ratio is kept
        scale = dose_mid / (0.5 * (spec.dose_min + spec.dose_max))
        local = replace(
            spec,
            dose_min=max(spec.dose_min * scale, 1e-6),
            dose_max=spec.dose_max * scale,
        )
    recipe, _, _ = build_recipe(
        local, scene01, seed=seed + 1,
        snr_target=local.snr_targets[0] if local.model == "additive-gaussian" else None,
    )
    gt = simulate(recipe)

    noisy = gt.noisy
    if parameter == "contrast":
        noisy = raster_from_array(noisy.data * value, noisy.bit_depth)

    # moment-based reference on a flat field of the same mid dose (counting models)
    if local.model != "additive-gaussian":
        flat_recipe = NoiseRecipe(
            dose_map=np.full((64, 64), dose_mid),
            emission_model=local.model,
            se_yield=local.se_yield,
            bse_yield=local.bse_yield,
            detector_gain=local.detector_gain,
            dc_offset=local.dc_offset,
            seed=seed + 1,
            bit_depth=local.bit_depth,
        )
        flat = simulate(flat_recipe).noisy.data
        sd = float(flat.std())
        moment_snr = (float(flat.mean()) - local.dc_offset) / sd if sd > 0 else math.inf
        rows.append(
            {
                "parameter": parameter,
                "value": value,
                "seed": seed,
                "method": "moment",
                "estimate": moment_snr,
                "reference": gt.true_snr,
            }
        )

    results = estimate_all(noisy, est_cfg)
    for method in methods:
        if method not in SINGLE_IMAGE_METHODS:
            continue
        est = results[method]
        rows.append(
            {
                "parameter": parameter,
                "value": value,
                "seed": seed,
                "method": method,
                "estimate": est.snr_linear if est.status == "ok" else None,
                "reference": gt.true_snr,
            }
        )
    return rows


def write_sweep_svg(rows, path) -> None:
    """Minimal dependency-free SVG scatter of estimates against the swept value."""
    pts = [
        (float(r["value"]), float(r["estimate"]))
        for r in rows
        if r.get("estimate") is not None and math.isfinite(float(r["estimate"]))
    ]
    width, height, margin = 480, 320, 40
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if pts:
        xs, ys = zip(*pts)
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        x_span = (x_hi - x_lo) or 1.0
        y_span = (y_hi - y_lo) or 1.0

        def sx(x):
            return margin + (x - x_lo) / x_span * (width - 2 * margin)

        def sy(y):
            return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

        for x, y in pts:
            lines.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="steelblue"/>')
        lines.append(
            f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
            f'y2="{height - margin}" stroke="black"/>'
        )
        lines.append(
            f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
            f'y2="{height - margin}" stroke="black"/>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


# --- denoising runs -------------------------------------------------------------


def filter_spec_to_string(spec: FilterSpec) -> str:
    if not spec.params:
        return spec.kind
    params = ",".join(f"{k}={_fmt(v)}" for k, v in sorted(spec.params.items()))
    return f"{spec.kind}:{params}"


def run_denoise(corpus_dir, spec: FilterSpec | str, out_dir=None,
                with_snr: bool = True) -> list[dict]:
    """Filter every noisy corpus image and report MSE/PSNR against the clean pair.

    When ``out_dir`` is given the filtered planes are quantized back to the
    input bit depth and written as ``<id>.filtered.pgm`` next to report.csv.
    """
    from .raster import quantize, save_pgm

    if isinstance(spec, str):
        spec = parse_filter_spec(spec)
    images = load_corpus(corpus_dir)
    label = filter_spec_to_string(spec)
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    rows = []
    for image in images:
        report = apply_filter(image.noisy, spec, reference=image.clean)
        if out is not None:
            stored, _ = quantize(report.output, image.noisy.bit_depth)
            save_pgm(stored, out / f"{image.image_id}.filtered.pgm")
        snr_before = snr_after = None
        if with_snr:
            snr_before = _nn_or_none(image.noisy)
            snr_after = _nn_or_none(report.output)
        rows.append(
            {
                "image_id": image.image_id,
                "filter": label,
                "mse_vs_clean": report.mse_vs_reference,
                "psnr_db": report.psnr_db,
                "estimated_noise_variance": report.estimated_noise_variance,
                "snr_before": snr_before,
                "snr_after": snr_after,
            }
        )
    if out is not None:
        write_csv(out / "report.csv", DENOISE_FIELDS, rows)
    return rows


def _nn_or_none(img: Raster):
    try:
        return estimate_nn(img).snr_linear
    except Exception:
        return None

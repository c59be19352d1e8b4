"""Command-line front end.

Subcommands: generate, estimate, sweep, denoise, report.  Exit codes:
0 success, 2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    SWEEP_FIELDS,
    corpus_spec_from_config,
    estimator_config_from_config,
    load_config,
    parse_methods,
    read_csv,
    run_denoise,
    run_estimation,
    run_sweep,
    summarize_results,
    write_csv,
    write_sweep_svg,
    SUMMARY_FIELDS,
)
from .corpus import generate_corpus
from .errors import ConfigError, DataError, SemSnrError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

_SWEEP_HELP = (
    "Synthetic analogs of instrument factor studies: 'dose' scales the mean "
    "electrons per pixel (the beam-current / scan-rate analog; counting SNR "
    "grows like sqrt(dose)); 'dwell' maps dwell seconds to dose through the "
    "beam current; 'contrast' rescales intensities of a fixed acquisition "
    "(autocorrelation-based estimates are scale-invariant, so curves should "
    "be flat)."
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semsnr",
        description="Synthetic SEM-style SNR benchmark toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic corpus with oracle truth")
    gen.add_argument("--config", required=True, help="flat key/value config with [corpus]")
    gen.add_argument("--out", required=True, help="corpus output directory")
    gen.add_argument("--seed", type=int, default=None, help="override the corpus base seed")

    est = sub.add_parser("estimate", help="run SNR estimators over a corpus")
    est.add_argument("--corpus", required=True, help="corpus directory from 'generate'")
    est.add_argument("--out", required=True, help="output directory for results.csv")
    est.add_argument("--methods", default="all", help="comma list or 'all'")
    est.add_argument("--config", default=None, help="optional config with [estimate]")
    est.add_argument("--jobs", type=int, default=1, help="parallel worker threads")

    swp = sub.add_parser("sweep", help="sensitivity sweep; " + _SWEEP_HELP)
    swp.add_argument("--config", required=True, help="config with [corpus] (+ optional [estimate])")
    swp.add_argument("--out", required=True, help="output directory for sweep.csv/sweep.svg")
    swp.add_argument("--parameter", required=True, choices=("dose", "dwell", "contrast"),
                     help=_SWEEP_HELP)
    swp.add_argument("--range", required=True,
                     help="comma-separated monotone values, e.g. 25,100,400")
    swp.add_argument("--methods", default="nn,lsr,acldr")
    swp.add_argument("--seeds", type=int, default=3, help="seeds per swept value")
    swp.add_argument("--seed", type=int, default=None, help="override the base seed")

    den = sub.add_parser("denoise", help="filter a corpus and report MSE/PSNR")
    den.add_argument("--corpus", required=True)
    den.add_argument("--out", required=True)
    den.add_argument("--filter", required=True, dest="filter_spec",
                     help="filter spec, e.g. wiener_local:window=7,noise_var=25.0")

    rep = sub.add_parser("report", help="summarize an existing results.csv")
    rep.add_argument("--results", required=True, help="results.csv from 'estimate'")
    rep.add_argument("--out", default=None, help="optional output directory for summary.csv")
    return parser


def _cmd_generate(args) -> int:
    spec = corpus_spec_from_config(load_config(args.config), seed_override=args.seed)
    rows = generate_corpus(spec, args.out)
    print(f"generated {len(rows)} image pair(s) in {args.out}")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    methods = parse_methods(args.methods)
    est_cfg = (
        estimator_config_from_config(load_config(args.config))
        if args.config
        else estimator_config_from_config(_empty_config())
    )
    rows, summary = run_estimation(
        args.corpus, methods, est_cfg, out_dir=args.out, jobs=max(args.jobs, 1)
    )
    for line in summary:
        med = line["median_abs_rel_error"]
        med_text = f"{med:.4f}" if med is not None else "n/a"
        print(f"{line['method']:>12}: {line['n_ok']}/{line['n_total']} ok, "
              f"median |rel err| = {med_text}")
    return EXIT_OK


def _empty_config():
    import configparser

    return configparser.ConfigParser()


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    spec = corpus_spec_from_config(cfg, seed_override=args.seed)
    est_cfg = estimator_config_from_config(cfg)
    try:
        values = [float(v) for v in args.range.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --range value: {exc}") from exc
    rows = run_sweep(args.parameter, values, spec, parse_methods(args.methods),
                     est_cfg, seeds=args.seeds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", SWEEP_FIELDS, rows)
    write_sweep_svg(rows, out / "sweep.svg")
    print(f"wrote {len(rows)} sweep rows to {out / 'sweep.csv'}")
    return EXIT_OK


def _cmd_denoise(args) -> int:
    from .denoise import parse_filter_spec
    from .errors import DomainError

    try:
        spec = parse_filter_spec(args.filter_spec)
    except DomainError as exc:
        raise ConfigError(f"bad --filter value: {exc}") from exc
    rows = run_denoise(args.corpus, spec, out_dir=args.out)
    mses = [r["mse_vs_clean"] for r in rows if r["mse_vs_clean"] is not None]
    if mses:
        print(f"filtered {len(rows)} image(s); mean MSE vs clean = {sum(mses) / len(mses):.4g}")
    return EXIT_OK


def _cmd_report(args) -> int:
    raw = read_csv(args.results)
    rows = []
    for row in raw:
        rel = row.get("rel_error", "")
        rows.append(
            {
                "method": row["method"],
                "status": row["status"],
                "rel_error": float(rel) if rel not in ("", None) else None,
            }
        )
    summary = summarize_results(rows)
    for line in summary:
        med = line["median_abs_rel_error"]
        med_text = f"{med:.4f}" if med is not None else "n/a"
        print(f"{line['method']:>12}: {line['n_ok']}/{line['n_total']} ok, "
              f"median |rel err| = {med_text}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "summary.csv", SUMMARY_FIELDS, summary)
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "estimate": _cmd_estimate,
    "sweep": _cmd_sweep,
    "denoise": _cmd_denoise,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SemSnrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Record the estimator regression baseline on the frozen oracle corpus.

Runs every single-image estimator over the 54-image reference corpus and
writes each method's median absolute relative error to
tests/data/estimator_baseline.csv.  The test suite pins future runs to these
values within +-20% of themselves, so regenerate the file only when an
estimator change is intentional.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from semsnr.corpus import iter_corpus, reference_corpus_spec
from semsnr.estimators import EstimatorConfig, estimate_all

SINGLE_METHODS = ("nn", "fol", "lsr", "nllsr", "asnn", "acldr", "chillsr")
BENCH_CONFIG = EstimatorConfig(epsilon_policy="zero")


def main() -> int:
    errors = {m: [] for m in SINGLE_METHODS}
    count = 0
    for image_id, _, _, gt, row in iter_corpus(reference_corpus_spec()):
        results = estimate_all(gt.noisy, BENCH_CONFIG)
        for method in SINGLE_METHODS:
            est = results[method]
            if est.status != "ok":
                print(f"WARNING: {image_id} {method} -> {est.status}", file=sys.stderr)
                continue
            errors[method].append(abs((est.snr_linear - row["true_snr"]) / row["true_snr"]))
        count += 1
        if count % 9 == 0:
            print(f"  {count} images done")

    out = Path(__file__).resolve().parents[1] / "tests" / "data" / "estimator_baseline.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="ascii") as fh:
        fh.write("# semsnr-csv v1\n")
        fh.write("method,n,median_abs_rel_error\n")
        for method in SINGLE_METHODS:
            median = float(np.median(errors[method]))
            fh.write(f"{method},{len(errors[method])},{median!r}\n")
            print(f"{method:>8}: median |rel err| = {median:.4f} over {len(errors[method])} images")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

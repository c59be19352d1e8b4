import csv
import math
from pathlib import Path

import numpy as np
import pytest

from semsnr.corpus import iter_corpus, reference_corpus_spec
from semsnr.estimators import EstimatorConfig

DATA_DIR = Path(__file__).parent / "data"

# the estimator configuration used for every benchmark/regression run: the
# additive error term of the line fit is disabled because it absorbs half the
# noise energy and degenerates at high SNR (see the package docs)
BENCH_CONFIG = EstimatorConfig(epsilon_policy="zero")


@pytest.fixture(scope="session")
def oracle_corpus():
    """The frozen 54-image oracle corpus, kept in memory for the session."""
    spec = reference_corpus_spec()
    return [
        {"image_id": image_id, "scene01": scene01, "gt": gt, "truth": row}
        for image_id, scene01, _, gt, row in iter_corpus(spec)
    ]


@pytest.fixture(scope="session")
def corpus_estimates(oracle_corpus):
    """estimate_all over the frozen corpus with the benchmark configuration."""
    from semsnr.estimators import estimate_all

    out = []
    for entry in oracle_corpus:
        out.append(
            {
                "image_id": entry["image_id"],
                "truth": entry["truth"],
                "results": estimate_all(entry["gt"].noisy, BENCH_CONFIG),
            }
        )
    return out


@pytest.fixture(scope="session")
def estimator_baseline():
    """Median |relative error| pins recorded at the first calibrated run."""
    path = DATA_DIR / "estimator_baseline.csv"
    if not path.exists():
        pytest.skip("estimator_baseline.csv missing; run scripts/calibrate_estimators.py")
    with open(path, newline="", encoding="ascii") as fh:
        first = fh.readline()
        assert first.startswith("# semsnr-csv")
        return {row["method"]: float(row["median_abs_rel_error"]) for row in csv.DictReader(fh)}


def rel_error(estimate: float, oracle: float) -> float:
    assert oracle > 0 and math.isfinite(oracle)
    return (estimate - oracle) / oracle


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))

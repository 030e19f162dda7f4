#!/usr/bin/env python3
"""Regenerate the checked-in golden fixtures under tests/data/.

The 8x4 path-graph case is small enough to verify every number against the
brute-force oracle (tests/oracles.py); this script asserts that agreement
to 1e-12 before freezing the files.  Golden bytes come from the package's
own writers so the byte-identity tests double as format regression tests.

Run from the repository root:  python3 scripts/make_golden_fixtures.py
"""

import pathlib
import sys

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402
from omap_eval import (  # noqa: E402
    LabelMatrix,
    ScoreMatrix,
    WeightMatrix,
    compare_reports,
    comparison_csv,
    load_context,
    obce_weights_batch,
    omap,
    write_matrix,
    write_report,
)

DATA = ROOT / "tests" / "data"

PATH_GRAPH = "a\nb\nc\nd\n\na b\nb c\nc d\n"
CLASS_INDEX = "index,mid,display_name\n0,a,Alpha\n1,b,Bravo\n2,c,Charlie\n3,d,Delta\n"

# All scores are multiples of 1/16 (exactly representable in float32) and
# every column carries at least one tied pair, so the fixture exercises the
# tie-handling path.  Sample 0 carries a far FP: a high score on d while
# labeled a (graph distance 3 = d_max).
SCORES = np.array(
    [
        [0.875, 0.25, 0.125, 0.8125],
        [0.75, 0.6875, 0.25, 0.125],
        [0.3125, 0.875, 0.25, 0.0625],
        [0.125, 0.25, 0.9375, 0.125],
        [0.0625, 0.125, 0.3125, 0.875],
        [0.125, 0.0625, 0.75, 0.6875],
        [0.8125, 0.3125, 0.125, 0.25],
        [0.25, 0.75, 0.6875, 0.3125],
    ],
    dtype=np.float32,
)
LABELS = np.array(
    [
        [1, 0, 0, 0],
        [1, 1, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 1],
        [1, 0, 0, 0],
        [0, 1, 1, 0],
    ],
    dtype=np.float32,
)


def degraded_scores() -> np.ndarray:
    # Model B: the far FP outranks every true d positive; strictly worse at
    # every level, so all comparison deltas share one sign.
    out = SCORES.copy()
    out[0, 3] = 0.9375
    return out


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    (DATA / "path_graph.edges").write_text(PATH_GRAPH)
    (DATA / "path_classes.csv").write_text(CLASS_INDEX)

    scores = ScoreMatrix.from_values(SCORES)
    labels = LabelMatrix.from_values(LABELS)
    scores_b = ScoreMatrix.from_values(degraded_scores())
    write_matrix(scores, DATA / "golden_scores.omap")
    write_matrix(labels, DATA / "golden_labels.omap")
    write_matrix(scores_b, DATA / "golden_scores_b.omap")

    context = load_context(
        class_index_path=DATA / "path_classes.csv",
        edge_list_path=DATA / "path_graph.edges",
    )
    report = omap(scores, labels, context.dist_base, classes=context.classes)

    base = context.dist_base.values.tolist()
    levels = list(report.metadata.levels)
    assert levels == [0, 1, 2]
    oracle_map = oracles.map_score(scores.values, labels.values)
    oracle_omap = oracles.omap_score(scores.values, labels.values, base, levels)
    assert abs(report.map - oracle_map) <= 1e-12, (report.map, oracle_map)
    assert abs(report.omap - oracle_omap) <= 1e-12, (report.omap, oracle_omap)
    for j, lam in enumerate(levels):
        per_class = oracles.oap_per_class(scores.values, labels.values, base, lam)
        for pc, ref in zip(report.per_class, per_class):
            assert ref is not None and abs(pc.oap[j] - ref) <= 1e-12
    write_report(report, DATA / "golden_report.json")

    report_b = omap(scores_b, labels, context.dist_base, classes=context.classes)
    oracle_omap_b = oracles.omap_score(scores_b.values, labels.values, base, levels)
    assert abs(report_b.omap - oracle_omap_b) <= 1e-12
    comparison = compare_reports(report, report_b)
    assert all(row.delta > 0 for row in comparison.levels)
    (DATA / "golden_compare.csv").write_text(comparison_csv(comparison))

    weights = obce_weights_batch(labels, context.dist_base, beta=1.0)
    for n, label_set in enumerate(labels.label_sets):
        ref = oracles.obce_weight_vector(list(label_set), base, 1.0)
        np.testing.assert_allclose(weights[n], ref, atol=1e-12)
    write_matrix(WeightMatrix.from_values(weights), DATA / "golden_weights_beta1.omap")
    write_matrix(WeightMatrix.from_values(weights), DATA / "golden_weights_beta1.csv", fmt="csv")

    print(f"mAP   {report.map!r}")
    print(f"OmAP  {report.omap!r}")
    print(f"OmAP0 {report.omap0!r}")
    print(f"wrote fixtures to {DATA}")


if __name__ == "__main__":
    main()

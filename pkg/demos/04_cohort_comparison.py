"""Compare two synthetic cohorts of bundles by their Reeb graph features.

Cohort A holds tight, coherent bundles; cohort B's fibers wobble harder,
so their grouping structure fragments and the feature distributions shift.
Eleven subjects per cohort, one Reeb graph per subject at a fixed epsilon,
then Mann-Whitney U and Welch t-test p-values per feature.
"""

import pathlib

import trajreeb as tr
from trajreeb.metrics import comparison_to_json, reports_to_csv

out = pathlib.Path("out")
out.mkdir(exist_ok=True)

EPS = 1.2
N_SUBJECTS = 11


def cohort(wobble, seed0):
    reports = []
    for i in range(N_SUBJECTS):
        bundle = tr.make_bundle(80, 50, spacing=1.0, wobble=wobble, seed=seed0 + i)
        reports.append(tr.compute_metrics(tr.build_reeb(bundle, EPS)))
    return reports


print(f"building {2 * N_SUBJECTS} subject graphs at epsilon {EPS} ...")
cohort_a = cohort(wobble=0.30, seed0=100)
cohort_b = cohort(wobble=0.55, seed0=200)

(out / "cohort_a.csv").write_text(reports_to_csv(cohort_a))
(out / "cohort_b.csv").write_text(reports_to_csv(cohort_b))
print(f"wrote {out/'cohort_a.csv'} and {out/'cohort_b.csv'}")

comparison = tr.compare_cohorts(cohort_a, cohort_b)
(out / "comparison.json").write_text(comparison_to_json(comparison))
print(f"wrote {out/'comparison.json'}\n")

print(f"{'feature':<20} {'mean A':>9} {'mean B':>9} {'MW p':>9} {'Welch p':>9}")
for name, m in comparison.metrics.items():
    print(f"{name:<20} {m.mean_a:>9.3f} {m.mean_b:>9.3f} "
          f"{m.mannwhitney_p:>9.4f} {m.welch_p:>9.4f}")
print("\nsmall p-values flag features that separate the cohorts; with only "
      f"{N_SUBJECTS} subjects a side, treat them as screening, not proof")

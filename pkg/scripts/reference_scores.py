"""Rebuild two reference NetTrustScore rows from engineered datasets.

For each model the accuracy is derived from the decomposition
``net = acc * correct + (1 - acc) * incorrect``; the script then generates
records hitting those conditional means and reports what the tool measures.

    python3 scripts/reference_scores.py --records 10000 --seed 0
"""

import argparse

from trustlens import ScoredTable, conditional_summary, net_trust_score, score_records, trust_spectrum
from trustlens.fixtures import REFERENCE_SCORES, accuracy_from_decomposition, engineered_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--records", type=int, default=10_000)
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'model':<12} {'accuracy':>9} {'T(y=z)':>8} {'T(y!=z)':>8} {'NTS':>8} {'target':>7}")
    for model, (net, correct, incorrect) in REFERENCE_SCORES.items():
        acc = accuracy_from_decomposition(net, correct, incorrect)
        labels, records = engineered_dataset(acc, correct, incorrect, args.records, args.classes, args.seed)
        table = ScoredTable.from_scored(score_records(records))
        s = conditional_summary(table)
        nts = net_trust_score(trust_spectrum(table, labels))
        print(f"{model:<12} {s.accuracy:>9.4f} {s.conditional_correct:>8.4f} {s.conditional_incorrect:>8.4f} "
              f"{nts:>8.4f} {net:>7.3f}")


if __name__ == "__main__":
    main()

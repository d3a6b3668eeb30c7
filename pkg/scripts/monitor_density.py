"""Conditional trust densities for the synthetic monitor-like class.

Prints the local maxima of the incorrect-answer KDE curve for a range of
bandwidths and writes the default-bandwidth plot as SVG.

    python3 scripts/monitor_density.py --out monitor.svg
"""

import argparse
from pathlib import Path

from trustlens import DensityConfig, ScoredTable, conditional_trust_densities, score_records
from trustlens.density import local_maxima, silverman_bandwidth
from trustlens.fixtures import monitor_like_dataset
from trustlens.render import render_density_plot


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--out", type=Path, default=Path("monitor_density.svg"))
    args = parser.parse_args()

    labels, records = monitor_like_dataset(args.seed)
    table = ScoredTable.from_scored(score_records(records))
    monitor = table.subset(table.oracle == labels.index_of("monitor"))
    default_bw = silverman_bandwidth(monitor.trust)
    print(f"monitor: {len(monitor)} records, accuracy {monitor.correct.mean():.3f}, "
          f"Silverman bandwidth {default_bw:.4f}")
    for bw in (0.02, 0.04, default_bw, 0.15, 0.25):
        pair = conditional_trust_densities(monitor, DensityConfig("kde", bandwidth=bw))
        grid = pair.incorrect.grid
        peaks = [round(float(grid[i]), 3) for i in local_maxima(pair.incorrect.values)]
        print(f"  bandwidth {bw:.4f}: incorrect-answer peaks at {peaks}")

    pair = conditional_trust_densities(monitor, DensityConfig("kde"))
    args.out.write_text(render_density_plot(pair, "monitor-like class"), encoding="utf-8")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

"""Time ``trustlens report`` on a large synthetic dump and report peak memory.

    python3 scripts/scale_smoke.py --records 1000000 --classes 1000 --workdir /tmp/scale
"""

import argparse
import resource
import shutil
import subprocess
import sys
import time
from pathlib import Path

from trustlens.fixtures import write_scale_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--records", type=int, default=1_000_000)
    parser.add_argument("--classes", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workdir", type=Path, default=Path("scale-run"))
    parser.add_argument("--keep", action="store_true", help="keep the generated input")
    args = parser.parse_args()

    inputs = args.workdir / "in"
    start = time.perf_counter()
    labels, preds = write_scale_dataset(inputs, args.records, args.classes, args.seed)
    print(f"generated {preds.stat().st_size / 1e9:.2f} GB in {time.perf_counter() - start:.1f}s")

    out = args.workdir / "out"
    shutil.rmtree(out, ignore_errors=True)
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "trustlens", "report", "--predictions", str(preds), "--labels", str(labels),
         "--no-density-plots", "--out", str(out)]
    )
    elapsed = time.perf_counter() - start
    peak = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss / 1024
    print(f"report: exit {proc.returncode}, {elapsed:.1f}s, peak RSS {peak:.0f} MB")
    if not args.keep:
        shutil.rmtree(inputs, ignore_errors=True)
    sys.exit(proc.returncode)


if __name__ == "__main__":
    main()

"""RF baseline on WISDM with 10 s windows and no overlap (optional external check).

    python3 scripts/prepare_wisdm.py wisdm-dataset/raw/phone/accel -o wisdm.csv
    python3 scripts/wisdm_baseline.py wisdm.csv --out wisdm_results

Prints the overall accuracy of each model and, for RF, whether it lies
within 76 +/- 8 points of the reference value.
"""
import argparse
import json
import sys
from pathlib import Path

from harbench.cli import main as cli_main
from harbench.synthetic import write_config

REFERENCE = 76.0
TOLERANCE = 8.0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dataset", help="CSV written by prepare_wisdm.py")
    ap.add_argument("--out", default="wisdm_results")
    ap.add_argument("--models", default="RF")
    ap.add_argument("--cut", type=float, default=8.0,
                    help="lowpass cutoff in Hz (must stay below the 10 Hz Nyquist limit)")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = write_config(out / "wisdm.ini", str(Path(args.dataset).resolve()), header_type="tdcps",
                       sampling_frequency=20, data_treatment="segmentation", time_window=10,
                       overlap=0, sub_method="mean", filter="lowpass", filter_order=4,
                       cut=args.cut, normalization_method="robust", split_method="intra",
                       test_size=0.25, k_fold=3, features_selection=False,
                       data_balancing_method="none", use_ml=args.models, use_dl="")
    code = cli_main(["run", "--config", str(cfg), "--out", str(out), "--jobs", str(args.jobs)])
    if code:
        sys.exit(code)
    report = json.loads((out / "report.json").read_text())
    for m in report["models"]:
        acc = m["overall_accuracy_percent"]
        line = f"{m['model']}: overall accuracy {acc:.2f}%"
        if m["model"] == "RF":
            ok = abs(acc - REFERENCE) <= TOLERANCE
            line += f" (reference {REFERENCE:g} +/- {TOLERANCE:g}: {'within' if ok else 'outside'})"
        print(line)


if __name__ == "__main__":
    main()

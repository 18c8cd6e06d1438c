"""Write the separable synthetic dataset plus a matching INI file.

    python3 scripts/make_synthetic_dataset.py --out demo/
    harbench run --config demo/config.ini --out demo/results
"""
import argparse
from pathlib import Path

from harbench.synthetic import write_config, write_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="demo", help="output directory")
    ap.add_argument("--subjects", type=int, default=6)
    ap.add_argument("--activities", default="walk,sit,run,stairs")
    ap.add_argument("--seconds", type=float, default=20.0, help="seconds per subject and activity")
    ap.add_argument("--fs", type=int, default=50, help="sampling frequency in Hz")
    ap.add_argument("--noise", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = write_dataset(out / "data.csv", subjects=tuple(str(i + 1) for i in range(args.subjects)),
                         activities=tuple(args.activities.split(",")), seconds=args.seconds,
                         fs=args.fs, seed=args.seed, noise=args.noise)
    cfg = write_config(out / "config.ini", data.resolve(), sampling_frequency=args.fs,
                       use_ml="kNN, LDA, QDA, RF, DT", use_dl="CNN", epochs=30,
                       seed=args.seed)
    print(f"dataset: {data}\nconfig:  {cfg}")


if __name__ == "__main__":
    main()

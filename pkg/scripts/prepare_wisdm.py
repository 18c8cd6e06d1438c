"""Convert raw WISDM accelerometer files into a harbench CSV (header type tdcps).

Raw lines look like ``subject,activity,timestamp,x,y,z;``. Both the 2019
smartphone/smartwatch release (activity codes A-S, timestamps in ns) and the
older single-file release (activity names, timestamps in ms or ns) use it.

    python3 scripts/prepare_wisdm.py wisdm-dataset/raw/phone/accel -o wisdm_phone_accel.csv

Rows are grouped per subject in file order. Each maximal block of one
activity becomes its own session, so windows never straddle two activities.
Malformed lines are counted and skipped.
"""
import argparse
import csv
import sys
from pathlib import Path

# activity codes of the 2019 release
CODES = {
    "A": "walking", "B": "jogging", "C": "stairs", "D": "sitting", "E": "standing",
    "F": "typing", "G": "teeth", "H": "soup", "I": "chips", "J": "pasta", "K": "drinking",
    "L": "sandwich", "M": "kicking", "O": "catch", "P": "dribbling", "Q": "writing",
    "R": "clapping", "S": "folding",
}


def parse_line(line):
    parts = [p.strip() for p in line.strip().rstrip(";").split(",")]
    if len(parts) < 6:
        return None
    subject, activity, stamp, x, y, z = parts[:6]
    try:
        vals = [float(x), float(y), float(z)]
        stamp = int(float(stamp))
    except ValueError:
        return None
    return subject, CODES.get(activity, activity.lower()), stamp, vals


def iter_files(inputs):
    for p in map(Path, inputs):
        if p.is_dir():
            yield from sorted(f for f in p.rglob("*.txt") if not f.name.startswith("."))
        else:
            yield p


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("inputs", nargs="+", help="raw .txt files or directories holding them")
    ap.add_argument("-o", "--out", required=True)
    ap.add_argument("--timestamp-unit", type=float, default=1e9,
                    help="raw timestamp ticks per second (1e9 for ns, 1e3 for ms)")
    args = ap.parse_args()

    rows, bad = [], 0
    for f in iter_files(args.inputs):
        with open(f, encoding="utf-8", errors="replace") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = parse_line(line)
                if rec is None:
                    bad += 1
                else:
                    rows.append(rec)
    if not rows:
        sys.exit("no parsable rows found")

    # keep file order inside a subject; sort subjects numerically when possible
    order = sorted(range(len(rows)), key=lambda i: (
        (0, int(rows[i][0])) if rows[i][0].isdigit() else (1, rows[i][0]), i))
    episode, prev = 0, None
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "acc_x", "acc_y", "acc_z", "activity", "subject", "session"])
        for i in order:
            subject, activity, stamp, vals = rows[i]
            if (subject, activity) != prev:
                episode += 1
                prev = (subject, activity)
            w.writerow([repr(stamp / args.timestamp_unit)] + [repr(v) for v in vals]
                       + [activity, subject, str(episode)])
    subjects = {r[0] for r in rows}
    activities = {r[1] for r in rows}
    print(f"{len(rows)} rows, {len(subjects)} subjects, {len(activities)} activities, "
          f"{episode} episodes, {bad} malformed lines skipped -> {args.out}")


if __name__ == "__main__":
    main()

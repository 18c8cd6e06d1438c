"""Acceptance criteria 1-10, each checked at its stated tolerance and time budget.

Every test records a PASS/FAIL/SKIP line that is printed in the
"acceptance criteria" section at the end of the pytest run (and live with -s).
Criterion 10 needs the WISDM data: set HARBENCH_WISDM_CSV to a file made by
scripts/prepare_wisdm.py.
"""
import json
import os
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

import conftest
from harbench.cleaning import FilterSpec, apply_filter, design_filter
from harbench.cli import main as cli_main
from harbench.config import load_config
from harbench.errors import DataError
from harbench.evaluation import StageTimer, confusion, metrics
from harbench.models import cnn, fit_predict_classical
from harbench.pipeline import build_plan, prepare
from harbench.preprocessing import apply_scaler, balance, fit_scaler, split
from harbench.preprocessing.split import SplitPlan
from harbench.representation import FeatureMatrix, segment
from harbench.synthetic import write_config, write_dataset
from conftest import raw_dataset


@contextmanager
def criterion(n, title, budget_s):
    """Time the body; record PASS only if it raised nothing and met the budget."""
    info = {"detail": ""}
    t0 = time.perf_counter()
    try:
        yield info
    except pytest.skip.Exception as exc:
        conftest.ACCEPTANCE_LINES[n] = f"[AC{n:02d}] SKIP  {title}: {exc}"
        raise
    except BaseException as exc:
        dt = time.perf_counter() - t0
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        conftest.ACCEPTANCE_LINES[n] = f"[AC{n:02d}] FAIL  {title} ({dt:.2f} s): {msg[:160]}"
        print(conftest.ACCEPTANCE_LINES[n])
        raise
    dt = time.perf_counter() - t0
    ok = dt < budget_s
    status = "PASS" if ok else "FAIL"
    line = f"[AC{n:02d}] {status}  {title} ({dt:.2f} s / budget {budget_s:g} s) {info['detail']}"
    conftest.ACCEPTANCE_LINES[n] = line.rstrip()
    print(line)
    assert ok, f"criterion {n} exceeded its {budget_s} s budget ({dt:.2f} s)"


# ----------------------------------------------------------------------------- 1

def brute_windows(x, fs, tw, o):
    w = int(round(tw * fs))
    step = int(round((tw - o) * fs))
    starts, s = [], 0
    while s + w <= len(x):
        starts.append(s)
        s += step
    return starts, [x[s:s + w] for s in starts]


def test_ac01_segmentation_formula():
    rng = np.random.default_rng(2024)
    with criterion(1, "segmentation count and contents vs brute-force enumerator", 5) as info:
        win = segment(raw_dataset(np.arange(100.0), fs=25), 2.0, 0.0)
        assert win.windows.shape == (2, 50)
        checked = 0
        for _ in range(1000):
            fs = int(rng.integers(2, 201))
            tw = float(rng.choice([0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 5.0, 10.0]))
            o = float(rng.uniform(0, tw))
            if int(round((tw - o) * fs)) < 1 or int(round(tw * fs)) < 1:
                o = 0.0
            n = int(rng.integers(1, 2000))
            x = rng.normal(size=n)
            starts, contents = brute_windows(x, fs, tw, o)
            if not starts:
                with pytest.raises(DataError):
                    segment(raw_dataset(x, fs=fs), tw, o)
            else:
                got = segment(raw_dataset(x, fs=fs), tw, o)
                assert got.starts.tolist() == starts
                assert np.array_equal(got.windows, np.array(contents))
                w, step = got.window_len, got.step
                assert len(starts) == (n - w) // step + 1
            checked += 1
        info["detail"] = f"{checked} tuples + the 100-sample/25 Hz/2 s -> 2x50 case"


# ----------------------------------------------------------------------------- 2

def test_ac02_scaler_contracts():
    rng = np.random.default_rng(7)
    with criterion(2, "minmax/standard/robust scaler contracts on 100 matrices", 5) as info:
        worst = {"minmax": 0.0, "standard_mean": 0.0, "standard_std": 0.0, "robust": 0.0}
        for _ in range(100):
            n, F = int(rng.integers(2, 80)), int(rng.integers(1, 12))
            X = rng.normal(size=(n, F)) * rng.uniform(0.01, 1e4, size=F) + rng.uniform(-1e3, 1e3, size=F)
            X[:, rng.random(F) < 0.15] = rng.normal()            # some constant columns
            Z = apply_scaler(fit_scaler(X, "minmax"), X)
            assert Z.min() >= 0 and Z.max() <= 1
            Z = apply_scaler(fit_scaler(X, "standard"), X)
            m, s = np.abs(Z.mean(axis=0)), Z.std(axis=0)
            assert (m < 1e-9).all()
            assert all(v == 0 or abs(v - 1) < 1e-9 for v in s)
            worst["standard_mean"] = max(worst["standard_mean"], m.max())
            worst["standard_std"] = max(worst["standard_std"], max(abs(v - 1) for v in s if v))\
                if any(s) else worst["standard_std"]
            Z = apply_scaler(fit_scaler(X, "robust"), X)
            med = np.abs(np.median(Z, axis=0)).max()
            assert med < 1e-9
            worst["robust"] = max(worst["robust"], med)
        info["detail"] = (f"max |mean| {worst['standard_mean']:.1e}, max |std-1| "
                          f"{worst['standard_std']:.1e}, max |median| {worst['robust']:.1e}")


# ----------------------------------------------------------------------------- 3

def test_ac03_lowpass_filter():
    with criterion(3, "Butterworth lowpass order 4, 20 Hz cut, 200 Hz", 2) as info:
        coeffs = design_filter(FilterSpec("lowpass", 4, (20.0,), 200.0))
        z = np.exp(-2j * np.pi * 20.0 / 200.0)
        gain = abs(np.polyval(coeffs.b[::-1], z) / np.polyval(coeffs.a[::-1], z))
        assert abs(gain - 2 ** -0.5) < 1e-6
        t = np.arange(4000) / 200.0                               # 20 s record
        hi = np.sin(2 * np.pi * 40 * t)
        lo = np.sin(2 * np.pi * 2 * t)
        out_hi = apply_filter(raw_dataset(hi, fs=200), coeffs).channels[:, 0]
        ratio = np.sqrt(np.mean(out_hi ** 2) / np.mean(hi ** 2))
        assert ratio < 0.02
        out_lo = apply_filter(raw_dataset(lo, fs=200), coeffs).channels[:, 0]
        corr = np.corrcoef(out_lo, lo)[0, 1]
        assert corr > 0.99
        info["detail"] = f"|H(20 Hz)|-1/sqrt2={gain - 2 ** -0.5:.1e}, 40 Hz RMS {100 * ratio:.2f}%, 2 Hz corr {corr:.5f}"


# ----------------------------------------------------------------------------- 4

def convex_violation(res, X):
    worst = 0.0
    for i in np.flatnonzero(res.synthetic):
        a, b = X[res.source[i]], X[res.partner[i]]
        assert res.y[res.source[i]] == res.y[res.partner[i]] == res.y[i]
        d = b - a
        j = int(np.argmax(np.abs(d)))
        lam = (res.X[i, j] - a[j]) / d[j] if d[j] else 0.0
        worst = max(worst, max(0.0, -lam, lam - 1), np.max(np.abs(res.X[i] - (a + lam * d))))
    return worst


def test_ac04_balancing():
    rng = np.random.default_rng(11)
    X = np.vstack([rng.normal(0, 1, size=(90, 4)), rng.normal(1.5, 1, size=(10, 4))])
    y = np.array([0] * 90 + [1] * 10)
    with criterion(4, "balancing on a 90/10 set", 10) as info:
        for method in ("random_under", "near_miss"):
            assert np.bincount(balance(X, y, method, seed=1).y).tolist() == [10, 10]
        worst = 0.0
        for method in ("random_over", "smote", "adasyn", "kmeans_smote"):
            res = balance(X, y, method, seed=1)
            assert np.bincount(res.y).tolist() == [90, 90], method
            worst = max(worst, convex_violation(res, X))
        assert worst <= 1e-9
        res = balance(X, y, "edited_nn")
        d = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(d, np.inf)
        nbr = np.argsort(d, axis=1, kind="stable")[:, :5]
        oracle = np.flatnonzero((y[nbr] != y[:, None]).sum(axis=1) > 5 / 2)
        removed = np.setdiff1d(np.arange(len(y)), res.source)
        assert removed.tolist() == oracle.tolist()
        info["detail"] = f"max convexity residual {worst:.1e}; edited_nn removed {len(removed)} rows = oracle"


# ----------------------------------------------------------------------------- 5

def brute_metrics(C):
    k = len(C)
    res = {m: [] for m in ("specificity", "sensitivity", "precision", "accuracy", "f1")}
    div = lambda a, b: a / b if b else 0.0
    for c in range(k):
        tp = C[c, c]
        fp = sum(C[i, c] for i in range(k) if i != c)
        fn = sum(C[c, j] for j in range(k) if j != c)
        tn = sum(C[i, j] for i in range(k) for j in range(k) if i != c and j != c)
        p, s = div(tp, tp + fp), div(tp, tp + fn)
        res["precision"].append(p)
        res["sensitivity"].append(s)
        res["specificity"].append(div(tn, tn + fp))
        res["accuracy"].append(div(tp + tn, tp + tn + fp + fn))
        res["f1"].append(div(2 * p * s, p + s))
    return res


def test_ac05_metrics_oracle():
    rng = np.random.default_rng(5)
    with criterion(5, "metrics vs one-vs-rest brute force on 500 matrices", 2) as info:
        worst = 0.0
        for _ in range(500):
            k = int(rng.integers(1, 7))
            C = rng.integers(0, 51, size=(k, k))
            m = metrics(C)
            for name, ref in brute_metrics(C).items():
                worst = max(worst, np.max(np.abs(m.per_class[name] - np.array(ref))))
        assert worst <= 1e-12
        m = metrics(np.array([[50, 10], [5, 35]]))
        assert abs(m.per_class["precision"][0] - 50 / 55) <= 1e-12
        assert abs(m.per_class["f1"][0] - 0.870) < 5e-4
        info["detail"] = f"max deviation {worst:.1e}; worked example F1 {m.per_class['f1'][0]:.4f}"


# ----------------------------------------------------------------------------- 6

def _holdout(X, y, seed):
    m = FeatureMatrix(X, tuple(f"f{i}" for i in range(X.shape[1])), y.astype(str),
                      np.array(["1"] * len(y)))
    plan = split(m, "intra", 0.25, 3, seed=seed)
    train_plan = SplitPlan(np.arange(len(plan.train_rows)), np.zeros(0, int), plan.fold_of, "intra", 3)
    return X[plan.train_rows], y[plan.train_rows], train_plan, X[plan.test_rows], y[plan.test_rows]


def _accuracy(model, X, y, seed=0):
    Xtr, ytr, plan, Xte, yte = _holdout(X, y, seed)
    _, pred = fit_predict_classical(model, Xtr, ytr, plan, Xte, int(y.max()) + 1, seed=seed)
    return float((pred == yte).mean())


def test_ac06_model_sanity():
    rng = np.random.default_rng(6)
    centers = np.array([[0, 0, 0, 0], [5, 5, 0, 0], [0, 5, 5, 5]], dtype=float)
    Xb = np.vstack([rng.normal(c, 1.0, size=(30, 4)) for c in centers])
    yb = np.repeat(np.arange(3), 30)
    corners = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)
    Xx = np.vstack([rng.normal(c, 0.35, size=(50, 2)) for c in corners])
    yx = np.repeat([0, 0, 1, 1], 50)
    with criterion(6, "classical models on blobs and XOR", 60) as info:
        blob = {m: _accuracy(m, Xb, yb) for m in ("kNN", "wkNN", "LDA", "QDA", "SVM", "RF", "DT")}
        xor = {m: _accuracy(m, Xx, yx) for m in ("LDA", "DT", "RF", "kNN")}
        assert all(v >= 0.95 for v in blob.values()), blob
        assert xor["LDA"] <= 0.65, xor
        assert all(xor[m] >= 0.90 for m in ("DT", "RF", "kNN")), xor
        info["detail"] = ("blobs min " + f"{min(blob.values()):.0%}" + "; XOR " +
                          ", ".join(f"{k} {v:.0%}" for k, v in xor.items()))


# ----------------------------------------------------------------------------- 7

def test_ac07_cnn():
    rng = np.random.default_rng(0)
    with criterion(7, "CNN gradient check and separable training", 120) as info:
        x = rng.normal(size=(3, 2, 9))
        yb = np.array([0, 2, 1])
        params = cnn.init_params(2, 3, rng)
        _, grads = cnn.loss_and_grads(params, x, yb)
        h, worst = 1e-6, 0.0
        for name in cnn.PARAM_NAMES:
            flat = params[name].reshape(-1)
            for i in range(flat.size):
                old = flat[i]
                flat[i] = old + h
                lp, _ = cnn.loss_and_grads(params, x, yb)
                flat[i] = old - h
                lm, _ = cnn.loss_and_grads(params, x, yb)
                flat[i] = old
                num, ana = (lp - lm) / (2 * h), grads[name].reshape(-1)[i]
                # relative error; the 1e-8 floor keeps near-zero entries from dividing by ~0
                worst = max(worst, abs(ana - num) / max(abs(ana), abs(num), 1e-8))
        assert worst < 1e-4
        y = np.arange(100) % 2
        xs = np.where(y == 1, 1.0, -1.0)[:, None, None] + rng.normal(size=(100, 1, 32))
        res = cnn.train(xs, y, 2, epochs=100, seed=0)
        assert res.accuracies[-1] >= 0.95
        info["detail"] = f"max relative gradient error {worst:.1e}; training accuracy {res.accuracies[-1]:.0%}"


# ----------------------------------------------------------------------------- 8

def test_ac08_leakage_guards():
    rng = np.random.default_rng(8)
    with criterion(8, "subject-disjoint splits and test-row corruption invariance", 10) as info:
        splits = 0
        for trial in range(100):
            S = int(rng.integers(4, 15))
            n = int(rng.integers(6 * S, 20 * S))
            subjects = np.concatenate([np.arange(S), rng.integers(0, S, size=n - S)]).astype(str)
            labels = np.where(rng.random(n) < 0.5, "a", "b")
            labels[:2] = ["a", "b"]
            m = FeatureMatrix(rng.normal(size=(n, 3)), ("x", "y", "z"), labels, subjects)
            try:
                plan = split(m, "inter", float(rng.uniform(0.15, 0.3)), 3, seed=trial)
            except DataError:
                continue
            assert not set(subjects[plan.train_rows]) & set(subjects[plan.test_rows])
            splits += 1
        assert splits >= 80

        tmp = Path(os.environ.get("TMPDIR", "/tmp"))
        combos = [("robust", "tree_based", "smote"), ("standard", "l1", "adasyn"),
                  ("minmax", "variance", "near_miss"), ("robust", "recursive", "edited_nn"),
                  ("standard", "tree_based", "kmeans_smote"), ("minmax", "l1", "random_over")]
        n = 120
        labels = np.array(["a"] * 80 + ["b"] * 40)
        for norm, sel, bal in combos:
            cfg = load_config(write_config(tmp / "ac08.ini", "unused.csv", normalization_method=norm,
                                           selection_method=sel, data_balancing_method=bal,
                                           n_features_to_select=3))
            X = rng.normal(size=(n, 8)) + (labels == "b")[:, None] * rng.normal(size=8)
            m = FeatureMatrix(X, tuple(f"f{i}" for i in range(8)), labels, np.array(["1"] * n))
            plan = split(m, "intra", 0.25, 3, seed=0)
            y = (labels == "b").astype(int)
            a = prepare(m, plan, y, cfg, StageTimer(), build_plan(cfg))
            Xc = X.copy()
            Xc[plan.test_rows] = rng.standard_cauchy(size=(len(plan.test_rows), 8)) * 1e6
            b = prepare(m.with_values(Xc), plan, y, cfg, StageTimer(), build_plan(cfg))
            assert np.array_equal(a.X_train, b.X_train), (norm, sel, bal)
            assert np.array_equal(a.y_train, b.y_train)
            assert np.array_equal(a.selection.kept, b.selection.kept)
        info["detail"] = f"{splits} inter splits disjoint; {len(combos)} scaler/selector/balancer combos invariant"


# ----------------------------------------------------------------------------- 9

def test_ac09_end_to_end_determinism(tmp_path):
    with criterion(9, "byte-identical report.json across runs and --jobs", 60) as info:
        data = write_dataset(tmp_path / "d.csv", activities=("walk", "sit", "run"),
                             subjects=("1", "2", "3", "4", "5"), noise=0.4)
        cfg = write_config(tmp_path / "c.ini", data, use_ml="kNN, DT, RF, SVM",
                           use_dl="CNN", epochs=5, data_balancing_method="smote")
        outs = []
        for tag, jobs in (("a", "1"), ("b", "1"), ("c", "2")):
            code = cli_main(["run", "--config", str(cfg), "--out", str(tmp_path / tag),
                             "--seed", "123", "--jobs", jobs])
            assert code == 0
            outs.append((tmp_path / tag / "report.json").read_bytes())
        assert outs[0] == outs[1], "same config and seed gave different reports"
        assert outs[0] == outs[2], "--jobs changed the report"
        n_models = len(json.loads(outs[0])["models"])
        info["detail"] = f"{n_models} models, {len(outs[0])} bytes, jobs 1 == jobs 2"


# ----------------------------------------------------------------------------- 10

WISDM_RF_ACCURACY = 76.0      # reference RF accuracy, 10 s windows, no overlap
WISDM_TOLERANCE = 8.0


@pytest.mark.external
def test_ac10_wisdm_rf(tmp_path):
    path = os.environ.get("HARBENCH_WISDM_CSV")
    with criterion(10, "WISDM v1 RF accuracy within 76 +/- 8 points", 30 * 60) as info:
        if not path or not Path(path).exists():
            pytest.skip("external data not available (set HARBENCH_WISDM_CSV)")
        # default configuration with segmentation; the 20 Hz cut sits above the
        # 10 Hz Nyquist limit of this dataset, so the lowpass moves to 8 Hz
        cfg = write_config(tmp_path / "wisdm.ini", path, header_type="tdcps", sampling_frequency=20,
                           data_treatment="segmentation", time_window=10, overlap=0,
                           sub_method="mean", filter="lowpass", filter_order=4, cut=8,
                           normalization_method="robust", split_method="intra", test_size=0.25,
                           k_fold=3, features_selection=False, data_balancing_method="none",
                           use_ml="RF", use_dl="")
        code = cli_main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert code == 0
        rf = next(m for m in json.loads((tmp_path / "out" / "report.json").read_text())["models"]
                  if m["model"] == "RF")
        acc = rf["overall_accuracy_percent"]
        info["detail"] = (f"RF overall accuracy {acc:.2f}% (summary {rf['summary']})")
        assert abs(acc - WISDM_RF_ACCURACY) <= WISDM_TOLERANCE, info["detail"]

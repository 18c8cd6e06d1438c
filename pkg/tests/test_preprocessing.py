import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harbench.errors import DataError
from harbench.preprocessing import apply_scaler, balance, drop, fit_scaler, select_features, split
from harbench.preprocessing.balancing import adasyn_allocation, edited_nn_mask
from harbench.representation import FeatureMatrix


def matrix(n=100, F=3, labels=None, subjects=None, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.array(labels if labels is not None else ["a", "b"] * (n // 2))
    subjects = np.array(subjects if subjects is not None else [str(i % 10 + 1) for i in range(n)])
    return FeatureMatrix(rng.normal(size=(n, F)), tuple(f"f{i}" for i in range(F)), labels, subjects)


# ---------------------------------------------------------------- drop

def test_drop_subject():
    m = matrix(subjects=[str(i % 3 + 1) for i in range(100)])
    out = drop(m, subjects=["3"])
    assert "3" not in set(out.subjects) and out.n_rows == 100 - 33


def test_drop_nothing_is_identity():
    m = matrix()
    assert drop(m) is m


def test_drop_everything():
    with pytest.raises(DataError, match="empty dataset"):
        drop(matrix(), activities=["a", "b"])


# ---------------------------------------------------------------- split

def test_intra_sizes_and_folds():
    plan = split(matrix(), "intra", 0.25, 3, seed=1)
    assert (len(plan.train_rows), len(plan.test_rows)) == (75, 25)
    assert sorted(np.bincount(plan.fold_of).tolist()) == [25, 25, 25]
    assert not set(plan.train_rows) & set(plan.test_rows)


def test_inter_explicit_subjects():
    m = matrix()
    plan = split(m, "inter", 0.25, 3, test_subjects=["9", "10"], seed=0)
    assert set(m.subjects[plan.test_rows]) == {"9", "10"}
    assert not {"9", "10"} & set(m.subjects[plan.train_rows])
    # folds are cut along subjects
    for f in range(3):
        fit, val = plan.fold(f)
        tr = m.subjects[plan.train_rows]
        assert not set(tr[fit]) & set(tr[val])


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 20), st.integers(0, 10_000))
def test_inter_split_is_subject_disjoint(n_subjects, seed):
    rng = np.random.default_rng(seed)
    n = 10 * n_subjects
    subjects = rng.integers(1, n_subjects + 1, size=n).astype(str)
    subjects[:n_subjects] = np.arange(1, n_subjects + 1).astype(str)
    labels = np.where(np.arange(n) % 2 == 0, "a", "b")
    m = matrix(n, labels=labels, subjects=subjects, seed=seed)
    try:
        plan = split(m, "inter", 0.25, 3, seed=seed)
    except DataError:
        return                          # too few training subjects for 3 folds
    assert not set(m.subjects[plan.train_rows]) & set(m.subjects[plan.test_rows])


# ---------------------------------------------------------------- scaling

def test_minmax_example():
    p = fit_scaler(np.array([[0.0], [5.0], [10.0]]), "minmax")
    assert apply_scaler(p, np.array([[0.0], [5.0], [10.0]])).ravel().tolist() == [0, 0.5, 1]


def test_standard_example():
    x = np.array([2, 4, 4, 4, 5, 5, 7, 9], dtype=float)[:, None]
    p = fit_scaler(x, "standard")
    assert (p.center[0], p.scale[0]) == (5.0, 2.0)
    assert apply_scaler(p, x)[0, 0] == -1.5


def test_constant_robust_is_zero():
    x = np.full((6, 1), 4.2)
    assert (apply_scaler(fit_scaler(x, "robust"), x) == 0).all()


def test_scaler_ignores_test_rows():
    rng = np.random.default_rng(0)
    train = rng.normal(size=(30, 4))
    p = fit_scaler(train, "robust")
    q = fit_scaler(train.copy(), "robust")
    np.testing.assert_array_equal(p.center, q.center)
    np.testing.assert_array_equal(apply_scaler(p, train), apply_scaler(q, train))


# ---------------------------------------------------------------- selection

def test_variance_drops_constant():
    X = np.random.default_rng(0).normal(size=(40, 4))
    X[:, 2] = 7.0
    res = select_features(X, np.arange(40) % 2, "variance")
    assert res.kept.tolist() == [0, 1, 3]


def test_recursive_full_count_is_identity():
    X = np.random.default_rng(0).normal(size=(40, 5))
    res = select_features(X, np.arange(40) % 2, "recursive", n_features_to_select=5)
    assert res.kept.tolist() == [0, 1, 2, 3, 4]


def test_recursive_reaches_target():
    rng = np.random.default_rng(0)
    y = np.arange(120) % 2
    X = rng.normal(size=(120, 12))
    X[:, 4] += 3 * y
    res = select_features(X, y, "recursive", n_features_to_select=3)
    assert len(res.kept) == 3 and 4 in res.kept


def _two_informative(seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(200) % 2
    X = rng.normal(size=(200, 10))
    X[:, 3] += 2.5 * y
    X[:, 7] -= 2.5 * y
    return X, y


def test_tree_based_keeps_informative():
    X, y = _two_informative()
    # ground truth by brute force: the two best single-feature threshold classifiers
    acc = []
    for j in range(10):
        thr = np.median(X[:, j])
        a = ((X[:, j] > thr) == y).mean()
        acc.append(max(a, 1 - a))
    assert set(np.argsort(acc)[-2:]) == {3, 7}
    kept = select_features(X, y, "tree_based", seed=0).kept
    assert {3, 7} <= set(kept.tolist())


def test_l1_keeps_informative():
    X, y = _two_informative(1)
    kept = select_features(X, y, "l1").kept
    assert {3, 7} <= set(kept.tolist())


# ---------------------------------------------------------------- balancing

def imbalanced(seed=0, n_major=90, n_minor=10):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, size=(n_major, 3)), rng.normal(2.5, 1, size=(n_minor, 3))])
    y = np.array([0] * n_major + [1] * n_minor)
    return X, y


def convex_ok(res, X, tol=1e-9):
    """Every synthetic row equals a + lam (b - a) for same-class parents, one lam for all coords."""
    for i in np.flatnonzero(res.synthetic):
        a, b = X[res.source[i]], X[res.partner[i]]
        if res.y[i] != res.y[res.source[i]]:
            return False
        d = b - a
        j = int(np.argmax(np.abs(d)))
        lam = (res.X[i, j] - a[j]) / d[j] if d[j] != 0 else 0.0
        if not -tol <= lam <= 1 + tol:
            return False
        if np.max(np.abs(res.X[i] - (a + lam * d))) > tol * max(1.0, np.abs(res.X[i]).max()):
            return False
    return True


@pytest.mark.parametrize("method,target", [("random_under", 10), ("near_miss", 10),
                                           ("random_over", 90), ("smote", 90),
                                           ("adasyn", 90), ("kmeans_smote", 90)])
def test_counts_equalized(method, target):
    X, y = imbalanced()
    res = balance(X, y, method, seed=3)
    assert np.bincount(res.y).tolist() == [target, target]
    assert convex_ok(res, X)


def test_edited_nn_matches_brute_force():
    X, y = imbalanced(1, 60, 40)
    k = 5
    res = balance(X, y, "edited_nn")
    removed = []
    for i in range(len(y)):
        d = np.sqrt(((X - X[i]) ** 2).sum(axis=1))
        d[i] = np.inf
        nbr = np.argsort(d, kind="stable")[:k]
        if (y[nbr] != y[i]).sum() > k / 2:
            removed.append(i)
    assert sorted(set(range(len(y))) - set(res.source.tolist())) == removed


def test_edited_nn_isolated_minority_row():
    X = np.vstack([np.zeros((10, 2)) + np.arange(10)[:, None] * 0.01, [[0.05, 0.0]], [[9, 9]] * 6])
    y = np.array([0] * 10 + [1] + [1] * 6)
    assert edited_nn_mask(X, y, 5)[10]


def test_adasyn_difficulty_monotone():
    X, y = imbalanced(2, 80, 20)
    rows, ratio, quota = adasyn_allocation(X, y, 1, 60, 5)
    assert quota.sum() == 60
    for i in range(len(rows)):
        for j in range(len(rows)):
            if ratio[i] > ratio[j]:
                assert quota[i] >= quota[j]


def test_balance_leaves_input_untouched():
    X, y = imbalanced()
    X0 = X.copy()
    res = balance(X, y, "smote", seed=0)
    np.testing.assert_array_equal(X, X0)
    np.testing.assert_array_equal(res.X[:len(y)], X0)


def test_smote_needs_enough_minority_rows():
    X, y = imbalanced(0, 20, 4)
    with pytest.raises(DataError, match="k\\+1"):
        balance(X, y, "smote")

import numpy as np
import pytest

from harbench import pipeline
from harbench.config import load_config
from harbench.errors import DataError, StageError
from harbench.evaluation import dumps_report


def test_minimal_plan(make_config):
    cfg = load_config(make_config(data_treatment="raw", normalization_method="none",
                                  filter="none", use_ml="kNN"))
    assert pipeline.build_plan(cfg).names == ["impute", "split", "kNN", "evaluate"]


def test_feature_plan_order(make_config):
    cfg = load_config(make_config(features_selection=True, data_balancing_method="smote",
                                  use_ml="kNN, DT", use_dl="CNN"))
    names = pipeline.build_plan(cfg).names
    assert names == ["impute", "filter", "segment", "extract_features", "split", "scale",
                     "select", "balance", "kNN", "DT", "CNN", "evaluate"]


def test_same_seed_same_report(make_config):
    cfg = load_config(make_config(use_ml="kNN, RF", data_balancing_method="random_under"))
    a, b = pipeline.run(cfg), pipeline.run(cfg)
    assert dumps_report(a) == dumps_report(b)
    assert [m.predictions for m in a.models] == [m.predictions for m in b.models]


def test_timings_cover_executed_stages_only(make_config):
    rep = pipeline.run(load_config(make_config(filter="none", use_ml="kNN")))
    subs = [s for _, s, _ in rep.timings]
    assert "filter" not in subs and "balance" not in subs
    assert {"impute", "segment", "extract_features", "split", "select", "kNN", "evaluate"} <= set(subs)


def test_report_contents(make_config):
    rep = pipeline.run(load_config(make_config(use_ml="kNN, LDA")))
    assert [m.model_id for m in rep.models] == ["kNN", "LDA"]
    assert rep.summary().splitlines()[0] == "kNN [100,100,100,100,100]"
    assert rep.selected_features["method"] == "tree_based"
    assert rep.data["classes"] == ["walk", "sit"]


def test_disabled_stages_leave_data_alone(make_config, monkeypatch):
    """With scale/select/balance off, the models see exactly the split rows."""
    seen = {}
    real = pipeline.fit_predict_classical

    def spy(model_id, X_train, y_train, plan, X_test, *a, **kw):
        seen["X_train"], seen["X_test"] = X_train.copy(), X_test.copy()
        return real(model_id, X_train, y_train, plan, X_test, *a, **kw)

    monkeypatch.setattr(pipeline, "fit_predict_classical", spy)
    cfg = load_config(make_config(data_treatment="segmentation", normalization_method="none",
                                  features_selection=False, use_ml="kNN"))
    rep = pipeline.run(cfg)
    from harbench import cleaning, dataset_io, representation
    from harbench.preprocessing import split
    c, _ = pipeline.resolve_config(cfg)
    data = cleaning.impute(dataset_io.load_dataset(c), cleaning.ImputationPolicy())
    data = cleaning.apply_filter(data, cleaning.design_filter(
        cleaning.FilterSpec(c.filter, c.filter_order, c.cut, data.sampling_frequency)))
    m = representation.segment(data, c.time_window, c.overlap).as_matrix()
    plan = split(m, c.split_method, c.test_size, c.k_fold, seed=c.seed)
    np.testing.assert_array_equal(seen["X_train"], m.values[plan.train_rows])
    np.testing.assert_array_equal(seen["X_test"], m.values[plan.test_rows])
    assert rep.data["features"] == m.values.shape[1]


def test_test_rows_cannot_influence_preprocessing(make_config):
    """Scaler, selector and balancer are fitted from training rows only."""
    from harbench.pipeline import prepare, build_plan
    from harbench.evaluation import StageTimer
    from harbench.preprocessing import split
    from harbench.representation import FeatureMatrix
    cfg = load_config(make_config(data_balancing_method="smote", use_ml="kNN"))
    rng = np.random.default_rng(0)
    n = 120
    labels = np.array(["a"] * 90 + ["b"] * 30)
    X = rng.normal(size=(n, 6)) + (labels == "b")[:, None]
    m = FeatureMatrix(X, tuple(f"f{i}" for i in range(6)), labels, np.array(["1"] * n))
    plan = split(m, "intra", 0.25, 3, seed=0)
    y = (labels == "b").astype(int)
    a = prepare(m, plan, y, cfg, StageTimer(), build_plan(cfg))
    Xc = X.copy()
    Xc[plan.test_rows] = rng.normal(size=(len(plan.test_rows), 6)) * 1e6
    b = prepare(m.with_values(Xc), plan, y, cfg, StageTimer(), build_plan(cfg))
    np.testing.assert_array_equal(a.X_train, b.X_train)
    np.testing.assert_array_equal(a.y_train, b.y_train)
    np.testing.assert_array_equal(a.selection.kept, b.selection.kept)


def test_stage_failure_names_stage(make_config):
    cfg = load_config(make_config(drop_activities="walk, sit", use_ml="kNN"))
    with pytest.raises(StageError, match="stage 'drop'") as info:
        pipeline.run(cfg)
    assert info.value.exit_code == DataError.exit_code


def test_cnn_on_windows_and_features(make_config):
    for extra in ({"use_features": False}, {}):
        cfg = load_config(make_config(use_ml="", use_dl="CNN", epochs=5, **extra))
        rep = pipeline.run(cfg)
        assert rep.models[0].model_id == "CNN"
        assert len(rep.models[0].curve.loss) == 5


def test_inter_split_report(make_config):
    cfg = load_config(make_config(split_method="inter", test_subjects="4", use_ml="kNN"))
    rep = pipeline.run(cfg)
    assert rep.data["test_subjects"] == ["4"] and "4" not in rep.data["train_subjects"]

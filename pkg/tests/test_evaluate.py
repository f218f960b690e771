import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import kruskal_h, pair_count_auc
from pdwriting.classify import KNNParams, RFParams, SVMParams
from pdwriting.evaluate import audit
from pdwriting.evaluate.dataset import Dataset, binary_dataset, staging_dataset
from pdwriting.evaluate.loocv import (
    DEFAULT_GRIDS,
    expand_grid,
    loocv_accuracy,
    loocv_grid_search,
    loocv_predict,
    loocv_staging,
    parse_grid,
    select_best,
)
from pdwriting.evaluate.metrics import (
    ConfusionMatrix,
    binary_metrics,
    cohen_kappa,
    cohen_kappa_flagged,
    macro_f1,
    roc_curve,
)
from pdwriting.evaluate.reports import atomic_write, histogram_csv, roc_csv, scores_csv, to_json
from pdwriting.evaluate.stats import kruskal_wallis, welch_t
from pdwriting.evaluate.validation import IdOverlapError, check_disjoint, frozen_validation
from pdwriting.features import FeatureTable


def blob_dataset(n=20, sep=3.0, seed=0, prefix="s"):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n, 2)), rng.normal(sep, 1, (n, 2))])
    y = np.array([-1] * n + [1] * n)
    return Dataset(X, y, [f"{prefix}{i}" for i in range(2 * n)], ["a", "b"])


# -- metrics --------------------------------------------------------------------------

def test_binary_metrics_hand_case():
    m = binary_metrics(np.array([[45, 5], [10, 40]]))
    assert m.accuracy == pytest.approx(0.85)
    assert m.sensitivity == pytest.approx(0.8)
    assert m.specificity == pytest.approx(0.9)
    assert m.f1 == pytest.approx(80 / 95)
    assert round(m.f1, 3) == 0.842
    assert not m.degenerate


def test_binary_metrics_perfect_and_all_positive():
    m = binary_metrics(np.array([[10, 0], [0, 10]]))
    assert (m.accuracy, m.sensitivity, m.specificity, m.f1) == (1, 1, 1, 1)
    m = binary_metrics(np.array([[0, 10], [0, 10]]))
    assert (m.sensitivity, m.specificity, m.accuracy) == (1, 0, 0.5)


def test_binary_metrics_degenerate_flag():
    m = binary_metrics(np.array([[10, 0], [0, 0]]))
    assert m.degenerate and m.sensitivity == 0 and m.f1 == 0


def test_confusion_from_labels():
    cm = ConfusionMatrix.from_labels([-1, -1, 1, 1, 1], [-1, 1, 1, 1, -1], classes=(-1, 1))
    assert cm.counts.tolist() == [[1, 1], [1, 2]]
    assert cm.total == 5 and cm.accuracy == pytest.approx(0.6)


def test_kappa_cases():
    assert cohen_kappa(np.array([[40, 10], [20, 30]])) == pytest.approx(0.4)
    assert cohen_kappa(np.diag([5, 7, 3])) == pytest.approx(1.0)
    assert cohen_kappa(np.array([[25, 25], [25, 25]])) == pytest.approx(0.0)
    k, flag = cohen_kappa_flagged(np.array([[10, 0], [0, 0]]))
    assert k == 0 and flag


@given(st.lists(st.integers(0, 20), min_size=9, max_size=9).filter(lambda v: sum(v) > 0), st.permutations(range(3)))
def test_kappa_permutation_invariance(cells, perm):
    c = np.array(cells).reshape(3, 3)
    p = list(perm)
    assert cohen_kappa(c[np.ix_(p, p)]) == pytest.approx(cohen_kappa(c), abs=1e-12)


def test_macro_f1():
    cm = ConfusionMatrix(np.array([[2, 1, 0], [0, 3, 0], [1, 0, 1]]), (0, 1, 2))
    f = [4 / 6, 6 / 7, 2 / 3]
    assert macro_f1(cm) == pytest.approx(np.mean(f))


def test_row_percent():
    cm = ConfusionMatrix(np.array([[3, 1], [0, 0]]), (0, 1))
    assert cm.row_percent().tolist() == [[75.0, 25.0], [0.0, 0.0]]


# -- ROC ---------------------------------------------------------------------------------

def test_roc_perfect_and_uninformative():
    assert roc_curve([0.9, 0.8, 0.2, 0.1], [1, 1, -1, -1]).auc == 1.0
    roc = roc_curve([0.5] * 6, [1, -1, 1, -1, 1, -1])
    assert roc.auc == 0.5
    assert roc.points() == [(0.0, 0.0, math.inf), (1.0, 1.0, 0.5)]


def test_roc_hand_case():
    scores = [0.9, 0.7, 0.7, 0.4, 0.3, 0.1]
    labels = [1, 1, -1, 1, -1, -1]
    want = pair_count_auc(scores, labels)
    assert want == pytest.approx(7.5 / 9)  # frozen pair count: 7 wins, 1 tie of 9 pairs
    roc = roc_curve(scores, labels)
    assert roc.auc == pytest.approx(want, abs=1e-12)
    assert np.all(np.diff(roc.fpr) >= 0) and np.all(np.diff(roc.tpr) >= 0)
    assert roc.fpr[-1] == roc.tpr[-1] == 1.0


def test_roc_single_class():
    with pytest.raises(ValueError):
        roc_curve([0.1, 0.2], [1, 1])


@given(st.lists(st.tuples(st.integers(-5, 5), st.booleans()), min_size=2, max_size=30)
       .filter(lambda v: 0 < sum(b for _, b in v) < len(v)))
def test_auc_equals_pair_statistic(rows):
    scores = [s / 2 for s, _ in rows]
    labels = [1 if b else -1 for _, b in rows]
    assert roc_curve(scores, labels).auc == pytest.approx(pair_count_auc(scores, labels), abs=1e-12)


# -- statistics ------------------------------------------------------------------------------

def test_kruskal_hand_case():
    res = kruskal_wallis([1, 2, 3], [4, 5, 6])
    assert kruskal_h([1, 2, 3], [4, 5, 6]) == pytest.approx(27 / 7)
    assert round(res.statistic, 3) == 3.857
    assert round(res.p, 3) == 0.050


def test_kruskal_identical_and_separated():
    res = kruskal_wallis([2.0] * 6, [2.0] * 6)
    assert res.statistic == 0 and res.p == 1
    a = np.arange(20.0)
    res = kruskal_wallis(a, a + 100)
    assert res.p < 0.001
    same = kruskal_wallis([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
    assert same.statistic == pytest.approx(0.0) and same.p == pytest.approx(1.0)


@given(st.lists(st.integers(0, 6), min_size=2, max_size=15), st.lists(st.integers(0, 6), min_size=2, max_size=15))
def test_kruskal_matches_rank_oracle(a, b):
    if len(set(a + b)) < 2:
        return
    assert kruskal_wallis(a, b).statistic == pytest.approx(kruskal_h(a, b), abs=1e-9)


def test_welch_textbook_case():
    a = [27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4]
    b = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4]
    # hand: means 20.82 / 22.98667, variances 7.86743 / 3.81267 -> t = -2.16667 / 0.88242
    res = welch_t(a, b)
    assert round(res.statistic, 3) == -2.455
    assert round(res.df, 2) == 24.99
    assert round(res.p, 3) == 0.021


def test_welch_equal_and_separated():
    res = welch_t([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert res.statistic == 0 and res.p == 1
    rng = np.random.default_rng(21)
    res = welch_t(rng.normal(0, 1, 30), rng.normal(5, 1, 30))
    assert abs(res.statistic) > 10 and res.p < 1e-10
    with pytest.raises(ValueError):
        welch_t([1.0, 1.0], [2.0, 2.0])
    with pytest.raises(ValueError):
        welch_t([1.0], [2.0, 3.0])


# -- datasets -----------------------------------------------------------------------------------

def test_datasets_from_table():
    t = FeatureTable(("a", "b", "c", "d"), ("yHC", "PD", "ValidationPD", "eHC"), (None, 15, 45, None),
                     ("spiral",) * 4, ("f",), np.arange(4.0))
    assert binary_dataset(t).y.tolist() == [-1, 1, 1, -1]
    assert staging_dataset(t).y.tolist() == [0, 1, 3, 0]


# -- LOOCV ------------------------------------------------------------------------------------------

def test_default_grids_match_reference_sets():
    powers = [10.0**e for e in range(-4, 4)]
    assert DEFAULT_GRIDS["knn"] == {"k": (3, 5, 7)}
    assert list(DEFAULT_GRIDS["svm"]["c"]) == powers and list(DEFAULT_GRIDS["svm"]["gamma"]) == powers
    assert DEFAULT_GRIDS["rf"] == {"n_trees": (5, 10, 15, 20, 50), "max_depth": (1, 2, 5, 10)}
    assert len(expand_grid("svm")) == 64 and len(expand_grid("rf")) == 20


def test_parse_grid():
    assert parse_grid("knn", "k=3,5,7") == expand_grid("knn")
    g = parse_grid("svm", "C=0.1,1;gamma=1e-2")
    assert g == [SVMParams(0.1, 0.01), SVMParams(1.0, 0.01)]
    assert parse_grid("rf", "N=5;D=2") == [RFParams(5, 2)]
    for bad in ("k=4", "q=1", "n_trees=2.5", "c="):
        with pytest.raises(ValueError):
            parse_grid("knn" if bad.startswith(("k", "q")) else ("rf" if "trees" in bad else "svm"), bad)


def test_separable_blobs_reach_full_accuracy():
    rep = loocv_grid_search(blob_dataset(sep=8.0), "svm")
    assert rep.accuracy == 1.0
    assert rep.best_params in expand_grid("svm")


def test_permuted_labels_near_chance():
    d = blob_dataset()
    yp = np.random.default_rng(100).permutation(d.y)
    d = Dataset(d.X, yp, d.ids, d.names)
    for fam in ("knn", "svm"):
        assert 0.3 <= loocv_grid_search(d, fam).accuracy <= 0.7


@pytest.mark.parametrize("params", [KNNParams(1), SVMParams(1e3, 1e3)])
def test_canary_is_never_trained_on(params):
    d = blob_dataset(sep=10.0, seed=3)
    X = np.vstack([d.X, [[0.0, 0.0]]])
    y = np.r_[d.y, 1]  # a lone positive deep inside the negative cluster
    ds = Dataset(X, y, d.ids + ("canary",), d.names)
    _, pred = loocv_predict(ds, params)
    assert pred[-1] == -1
    # sanity: a model that did see the canary would memorise it
    from pdwriting.classify import train
    assert train(params, X, y).predict(X[-1:])[0] == 1


@given(st.permutations(range(12)))
def test_grid_order_does_not_change_winner(perm):
    d = blob_dataset(n=8, sep=1.5, seed=4)
    grid = expand_grid("svm", {"c": (0.1, 1, 10), "gamma": (0.01, 0.1, 1, 10)})
    shuffled = [grid[i] for i in perm]
    assert loocv_grid_search(d, "svm", shuffled).best_params == loocv_grid_search(d, "svm", grid).best_params


def test_tie_break_prefers_smaller_model():
    grid = [SVMParams(10, 1), SVMParams(1, 0.1), SVMParams(1, 1)]
    correct = {p: 5 for p in grid}
    assert select_best(grid, correct) == SVMParams(1, 1)
    assert select_best([KNNParams(7), KNNParams(3)], {KNNParams(7): 2, KNNParams(3): 2}) == KNNParams(3)
    rf = [RFParams(10, 2), RFParams(5, 10), RFParams(5, 2)]
    assert select_best(rf, {p: 1 for p in rf}) == RFParams(5, 2)


def test_grid_scores_agree_with_single_fits():
    d = blob_dataset(n=10, sep=1.0, seed=5)
    grid = expand_grid("svm", {"c": (0.1, 10), "gamma": (0.1, 1)})
    rep = loocv_grid_search(d, "svm", grid)
    for p, acc in rep.grid:
        assert acc == pytest.approx(loocv_accuracy(d, p))
    grid = expand_grid("rf", {"n_trees": (5, 10), "max_depth": (1, 5)})
    rep = loocv_grid_search(d, "rf", grid, seed=2)
    for p, acc in rep.grid:
        assert acc == pytest.approx(loocv_accuracy(d, p, seed=2))


def test_loocv_rejects_singleton_class():
    d = Dataset(np.arange(4.0).reshape(4, 1), np.array([-1, -1, -1, 1]), "abcd", ["f"])
    with pytest.raises(ValueError):
        loocv_grid_search(d, "knn")
    with pytest.raises(ValueError):
        loocv_grid_search(blob_dataset(), "knn", [])


def test_report_serialises():
    rep = loocv_grid_search(blob_dataset(n=6), "knn")
    d = json.loads(to_json(rep.to_dict()))
    assert set(d) >= {"best_params", "accuracy", "sensitivity", "specificity", "f1", "kappa", "auc", "confusion"}
    assert d["best_params"]["family"] == "knn"
    assert roc_csv(rep.roc).startswith("fpr,tpr,threshold")
    assert len(scores_csv(rep.ids, rep.labels, rep.scores).splitlines()) == 13
    assert histogram_csv(rep.scores, rep.labels).count("\n") >= 2


def test_staging_loocv():
    rng = np.random.default_rng(6)
    centres = np.array([[0, 0], [5, 0], [0, 5], [5, 5]])
    X = np.vstack([rng.normal(c, 1, (6, 2)) for c in centres])
    y = np.repeat(np.arange(4), 6)
    ds = Dataset(X, y, [str(i) for i in range(24)], ["a", "b"])
    rep = loocv_staging(ds, expand_grid("svm", {"c": (1, 10), "gamma": (0.1, 1)}))
    assert rep.kappa > 0.8
    assert np.allclose(rep.confusion.row_percent().sum(axis=1), 100)
    with pytest.raises(ValueError):
        loocv_staging(Dataset(X[:19], y[:19], [str(i) for i in range(19)], ["a", "b"]))


# -- frozen validation ------------------------------------------------------------------------------

def test_frozen_validation_contract():
    dev = blob_dataset(seed=7, prefix="D")
    val = blob_dataset(seed=8, prefix="V")
    with audit.call_audit() as a:
        rep = frozen_validation(SVMParams(1, 0.1), dev, val)
    assert a.grid_searches == 0 and a.fits == 1 and a.fit_sizes == [len(dev)]
    assert rep.best_params == SVMParams(1, 0.1)
    dev_acc = loocv_accuracy(dev, SVMParams(1, 0.1))
    assert abs(rep.accuracy - dev_acc) <= 0.10


def test_frozen_validation_overlap():
    dev = blob_dataset(seed=7)
    with pytest.raises(IdOverlapError):
        frozen_validation(SVMParams(), dev, blob_dataset(seed=8))
    with pytest.raises(IdOverlapError):
        check_disjoint(Dataset(dev.X[:1], dev.y[:1], ["s0/spiral"], dev.names),
                       Dataset(dev.X[:1], dev.y[:1], ["s0/sentence"], dev.names))


def test_frozen_validation_with_trained_model():
    from pdwriting.classify import svm_train
    dev, val = blob_dataset(seed=9, prefix="D"), blob_dataset(seed=10, prefix="V")
    model = svm_train(dev.X, dev.y, 1, 0.1)
    with audit.call_audit() as a:
        rep = frozen_validation(model, None, val)
    assert a.fits == 0 and a.grid_searches == 0
    assert rep.accuracy > 0.9


def test_atomic_write(tmp_path):
    p = atomic_write(tmp_path / "sub" / "x.txt", "hello")
    assert p.read_text() == "hello"
    atomic_write(p, b"bye")
    assert p.read_text() == "bye"
    assert [q.name for q in p.parent.iterdir()] == ["x.txt"]

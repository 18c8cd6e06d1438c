import numpy as np


def largest_remainder(weights, total):
    """Split integer ``total`` proportionally to ``weights``.

    Floors first, then hands the leftover units to the largest fractional
    parts (earlier index wins ties). Larger weight never gets fewer units.
    """
    w = np.asarray(weights, dtype=float)
    if total <= 0 or len(w) == 0:
        return np.zeros(len(w), dtype=int)
    if w.sum() <= 0:
        w = np.ones_like(w)
    share = w / w.sum() * total
    base = np.floor(share).astype(int)
    left = int(total - base.sum())
    if left:
        frac = share - base
        order = np.lexsort((np.arange(len(w)), -frac))
        base[order[:left]] += 1
    return base


def first_appearance(values):
    """Unique values in order of first appearance."""
    _, first = np.unique(values, return_index=True)
    return np.asarray(values)[np.sort(first)]


def encode_labels(labels, classes=None):
    labels = np.asarray(labels)
    if classes is None:
        classes = first_appearance(labels)
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        codes = np.array([lookup[v] for v in labels], dtype=int)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} outside the known class set") from None
    return codes, np.asarray(classes)

"""scikit-learn style wrappers around the indicator functions.

The "samples" are quantum states or tomograms rather than feature vectors, so
these transformers fit into pipelines only at the point where states turn into
indicator features.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .hilbert import DensityOperator, PureState
from .indicators import pair_indicators, spin_setting_values, xi_tei_prime
from .tomography import QuadratureGrid, SpinTomogram

FEATURES = ("xi_tei", "xi_tei_prime", "xi_qmi")


def _as_list(X) -> list:
    if isinstance(X, (PureState, DensityOperator, SpinTomogram)):
        return [X]
    X = list(X)
    if not X:
        raise ValueError("expected at least one sample")
    return X


class IndicatorTransformer(TransformerMixin, BaseEstimator):
    """Map states to ``[xi_tei, xi_tei_prime, xi_qmi]`` for one bipartition.

    ``partition`` is a pair of label tuples; it must name either qubits only or
    a single field mode per side. Quadrature grid parameters apply to fields.
    """

    def __init__(self, partition=(("C",), ("D",)), x_max: float = 8.0, n_points: int = 321, n_theta: int = 16):
        self.partition = partition
        self.x_max = x_max
        self.n_points = n_points
        self.n_theta = n_theta

    def fit(self, X, y=None):
        states = _as_list(X)
        layout = None
        for s in states:
            if not isinstance(s, (PureState, DensityOperator)):
                raise TypeError(f"expected PureState or DensityOperator, got {type(s).__name__}")
            if layout is None:
                layout = s.layout
            elif s.layout != layout:
                raise ValueError("all samples must share one subsystem layout")
        block_a, block_b = (tuple(p) for p in self.partition)
        for lab in block_a + block_b:
            layout.index(lab)
        kinds = {layout.factor(lab).kind for lab in block_a + block_b}
        if kinds not in ({"qubit"}, {"field"}):
            raise ValueError("a partition may not mix qubits and field modes")
        self.layout_ = layout
        self.partition_ = (block_a, block_b)
        self.subsystem_kind_ = kinds.pop()
        self.grid_ = QuadratureGrid.uniform(self.x_max, self.n_points, self.n_theta)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "layout_")
        rows = []
        for s in _as_list(X):
            if s.layout != self.layout_:
                raise ValueError("sample layout differs from the one seen in fit")
            rows.append(pair_indicators(s, self.partition_, self.grid_))
        return np.array(rows, dtype=float)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.array(FEATURES, dtype=object)


class SpinTomogramIndicator(TransformerMixin, BaseEstimator):
    """Map spin tomograms (measured or simulated) to ``[xi_tei, xi_tei_prime]``.

    Needs no state: only the outcome distributions enter.
    """

    def __init__(self, block_a: Sequence[str] | None = None, block_b: Sequence[str] | None = None):
        self.block_a = block_a
        self.block_b = block_b

    def fit(self, X, y=None):
        tomos = _as_list(X)
        for t in tomos:
            if not isinstance(t, SpinTomogram):
                raise TypeError(f"expected SpinTomogram, got {type(t).__name__}")
            if (t.labels, t.axes) != (tomos[0].labels, tomos[0].axes):
                raise ValueError("all tomograms must share labels and axes")
        self.labels_ = tomos[0].labels
        self.axes_ = tomos[0].axes
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "labels_")
        rows = []
        for t in _as_list(X):
            if t.labels != self.labels_:
                raise ValueError("tomogram labels differ from the ones seen in fit")
            mis = [v.mi for v in spin_setting_values(t, self.block_a, self.block_b)]
            rows.append((float(np.mean(mis)), xi_tei_prime(mis)))
        return np.array(rows, dtype=float)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.array(FEATURES[:2], dtype=object)

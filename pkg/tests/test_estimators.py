import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from tomoent.circuit import RECIPES, exact_tomogram, run_tomography, tomogram_from_counts
from tomoent.estimators import IndicatorTransformer, SpinTomogramIndicator
from tomoent.hilbert import evolve_many
from tomoent.models import djc_model


@pytest.fixture(scope="module")
def djc_states():
    m = djc_model()
    return evolve_many(m.hamiltonian, m.psi0, [0.0, 0.4, 1.3])


def test_atom_features(djc_states):
    X = IndicatorTransformer().fit_transform(djc_states)
    assert X.shape == (3, 3)
    assert X[0] == pytest.approx([math.log(2) / 3, math.log(2), 2.0])


def test_field_features_small_grid(djc_states):
    est = IndicatorTransformer(partition=(("A",), ("B",)), n_points=161, n_theta=4)
    X = est.fit(djc_states).transform(djc_states[1:])
    assert X.shape == (2, 3) and np.all(X >= 0)
    assert list(est.get_feature_names_out()) == ["xi_tei", "xi_tei_prime", "xi_qmi"]


def test_params_and_clone():
    est = IndicatorTransformer(n_theta=8)
    assert est.get_params()["n_theta"] == 8
    assert clone(est).set_params(x_max=6.0).x_max == 6.0


def test_not_fitted(djc_states):
    with pytest.raises(NotFittedError):
        IndicatorTransformer().transform(djc_states)


def test_fit_validation(djc_states):
    with pytest.raises(ValueError):
        IndicatorTransformer(partition=(("A",), ("C",))).fit(djc_states)
    with pytest.raises(KeyError):
        IndicatorTransformer(partition=(("Z",), ("C",))).fit(djc_states)
    with pytest.raises(TypeError):
        IndicatorTransformer().fit([np.zeros(4)])
    with pytest.raises(ValueError):
        IndicatorTransformer().fit([])


def test_layout_mismatch_after_fit(djc_states):
    est = IndicatorTransformer().fit(djc_states)
    with pytest.raises(ValueError):
        est.transform([djc_model(n_max=2).psi0])


def test_spin_tomogram_indicator_in_pipeline():
    r = RECIPES["bell"]
    tomos = [exact_tomogram(r.build(), r.qubits),
             tomogram_from_counts(run_tomography(r.build(), r.qubits, 4096, seed=1))]
    X = SpinTomogramIndicator().fit_transform(tomos)
    assert X[0] == pytest.approx([math.log(2) / 3, math.log(2)])
    assert X[1] == pytest.approx(X[0], abs=5e-3)
    with pytest.raises(ValueError):
        SpinTomogramIndicator().fit(tomos).transform([exact_tomogram(RECIPES["djc_equiv"].build(), (0, 3))])
    pipe = make_pipeline(SpinTomogramIndicator(), StandardScaler())
    assert pipe.fit_transform(tomos).shape == (2, 2)

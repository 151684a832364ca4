import numpy as np
import pytest

from tomoent.hilbert import PureState, evolve, partial_trace
from tomoent.models import (
    InitialStateSpec,
    ModelParams,
    build_hdjc,
    build_hdtc,
    djc_layout,
    djc_model,
    dtc_model,
    excitation_operator,
    initial_state,
    tail_mass,
)


def basis_index(layout, **occupation):
    idx = [occupation.get(lab, 0) for lab in layout.labels]
    return int(np.ravel_multi_index(idx, layout.dims))


def test_ground_energy_lab_frame():
    params = ModelParams(omega=1.0, omega0=1.0, g=1.0, n_max=1)
    H = build_hdjc(params, frame="lab")
    i = basis_index(H.layout)
    # two atoms in |g>, each contributing -omega0/2 with splitting omega0
    assert H.matrix[i, i].real == pytest.approx(-1.0)


def test_coupling_matrix_element():
    H = build_hdjc(ModelParams(n_max=2))
    lay = H.layout
    e0 = basis_index(lay, C=1)
    g1 = basis_index(lay, A=1)
    assert H.matrix[g1, e0] == pytest.approx(1.0)
    # a^dag on |1> gives sqrt(2)
    assert H.matrix[basis_index(lay, A=2), basis_index(lay, A=1, C=1)] == pytest.approx(np.sqrt(2))


@pytest.mark.parametrize("frame", ["interaction", "lab"])
def test_excitation_number_conserved(frame):
    for H in (build_hdjc(ModelParams(n_max=2), frame), build_hdtc(ModelParams(n_max=2), frame)):
        for fld in ("A", "B"):
            assert H.commutator_norm(excitation_operator(H.layout, fld)) < 1e-12


def test_excitation_operator_checks_qubits():
    with pytest.raises(ValueError):
        excitation_operator(djc_layout(1), "A", ("D",))


def test_n_max_zero_rejected():
    with pytest.raises(ValueError):
        build_hdjc(ModelParams(n_max=0))


def test_initial_state_amplitudes():
    lay = djc_layout(1)
    psi = initial_state(InitialStateSpec.parse("psi0"), lay)
    a = psi.amplitudes
    assert a[basis_index(lay)] == pytest.approx(1 / np.sqrt(2))
    assert a[basis_index(lay, C=1, D=1)] == pytest.approx(1 / np.sqrt(2))


def test_dtc_initial_blocks_pair_across_cavities():
    m = dtc_model(initial="psi0_phi0")
    c1d1 = partial_trace(m.psi0, ("C1", "D1"))
    c2d2 = partial_trace(m.psi0, ("C2", "D2"))
    psi0 = np.array([1, 0, 0, 1]) / np.sqrt(2)
    phi0 = np.array([0, 1, 1, 0]) / np.sqrt(2)
    assert np.allclose(c1d1.matrix, np.outer(psi0, psi0))
    assert np.allclose(c2d2.matrix, np.outer(phi0, phi0))


def test_truncation_guard():
    with pytest.raises(ValueError):
        initial_state(InitialStateSpec(("psi0",), (1, 0)), djc_layout(1))


def test_unknown_block():
    with pytest.raises(ValueError):
        InitialStateSpec.parse("chi0")


def test_jc_detuned_oracle():
    # |e,0> in the interaction frame: <g,1|psi(t)> = -i g sin(W t) / W with W = sqrt(delta^2/4 + g^2),
    # times the phase exp(-i delta t / 2) picked up by the spectator atom D in |g>
    delta, t = 0.8, 1.1
    m = djc_model(delta=delta, initial="psi0")
    lay = m.psi0.layout
    amps = np.zeros(lay.total_dim, dtype=complex)
    amps[basis_index(lay, C=1)] = 1
    out = evolve(m.hamiltonian, PureState(amps, lay), t)
    W = np.sqrt(delta ** 2 / 4 + 1)
    assert out.amplitudes[basis_index(lay, A=1)] == pytest.approx(-1j * np.sin(W * t) / W * np.exp(-0.5j * delta * t), abs=1e-12)


def test_higher_truncation_agrees():
    t = 2.3
    a = evolve(djc_model(n_max=1).hamiltonian, djc_model(n_max=1).psi0, t)
    m3 = djc_model(n_max=3)
    b = evolve(m3.hamiltonian, m3.psi0, t)
    assert tail_mass(b) < 1e-12
    ra = partial_trace(a, ("C", "D")).matrix
    rb = partial_trace(b, ("C", "D")).matrix
    assert np.allclose(ra, rb, atol=1e-12)

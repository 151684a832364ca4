"""Property-based checks of the invariants each module promises."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import projector_basis
from tomoent.circuit import Circuit, Gate, GateKind, emit_qasm, gate_matrix, parse_qasm, run_statevector, sample_counts
from tomoent.hilbert import (
    SPIN_OPERATORS,
    DensityOperator,
    HermitianOperator,
    PureState,
    SubsystemLayout,
    evolve,
    partial_trace,
    random_density,
    random_pure_state,
    random_unitary,
    svne,
    tensor_product,
)
from tomoent.indicators import mutual_information, spin_setting_values, xi_qmi, xi_tei_prime, xi_tei_spins
from tomoent.models import ModelParams, build_hdjc, build_hdtc, djc_model, dtc_model, excitation_operator
from tomoent.tomography import QuadratureGrid, joint_optical_tomogram, optical_tomogram, reduce_tomogram, spin_tomogram

seeds = st.integers(0, 2 ** 32 - 1)
MIXED = SubsystemLayout.build(("A", "field", 2), ("C", "qubit"), ("D", "qubit"))


def rng_of(seed):
    return np.random.default_rng(seed)


def local_unitary(layout, rng):
    return tensor_product([random_unitary(d, rng) for d in layout.dims])


@settings(max_examples=50)
@given(seeds, st.floats(0, 50))
def test_evolution_preserves_norm(seed, t):
    rng = rng_of(seed)
    h = random_density(MIXED, rng).matrix * 10
    psi = evolve(HermitianOperator(h, MIXED), random_pure_state(MIXED, rng), t)
    assert abs(np.linalg.norm(psi.amplitudes) - 1) <= 1e-10


@settings(max_examples=50)
@given(seeds, st.sets(st.sampled_from(MIXED.labels), min_size=1))
def test_partial_trace_is_a_state(seed, keep):
    rho = random_density(MIXED, rng_of(seed))
    red = partial_trace(rho, keep)
    assert abs(np.trace(red.matrix).real - 1) <= 1e-10
    assert np.linalg.eigvalsh(red.matrix).min() >= -1e-12


@settings(max_examples=50)
@given(seeds)
def test_schmidt_spectra_agree(seed):
    psi = random_pure_state(SubsystemLayout.build(("A", "field", 2), ("B", "field", 2), ("C", "qubit"), ("D", "qubit")),
                            rng_of(seed))
    a = np.sort(np.linalg.eigvalsh(partial_trace(psi, ("A", "B")).matrix))
    b = np.sort(np.linalg.eigvalsh(partial_trace(psi, ("C", "D")).matrix))
    assert np.allclose(a, b, atol=1e-9)


@settings(max_examples=50)
@given(seeds)
def test_entropies_local_unitary_invariant(seed):
    rng = rng_of(seed)
    rho = random_density(MIXED, rng, rank=3)
    U = local_unitary(MIXED, rng)
    rotated = DensityOperator(U @ rho.matrix @ U.conj().T, MIXED)
    assert svne(rotated) == pytest.approx(svne(rho), abs=1e-9)
    for part in ((("A",), ("C", "D")), (("C",), ("D",))):
        assert xi_qmi(rotated, part) == pytest.approx(xi_qmi(rho, part), abs=1e-9)


@settings(max_examples=50)
@given(seeds)
def test_qmi_bound(seed):
    rho = random_density(SubsystemLayout.build(("A", "field", 3), ("C", "qubit")), rng_of(seed), rank=2)
    assert 0 <= xi_qmi(rho, (("A",), ("C",))) <= 2 * min(math.log2(3), 1) + 1e-9


@settings(max_examples=100)
@given(seeds, st.integers(2, 3))
def test_spin_commuting_diagram(seed, k):
    lay = SubsystemLayout.qubits(k)
    rho = random_density(lay, rng_of(seed))
    keep = lay.labels[: k - 1]
    lhs = reduce_tomogram(spin_tomogram(rho), keep).values
    rhs = spin_tomogram(partial_trace(rho, keep)).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


FIELD_GRID = QuadratureGrid.uniform(8.0, 97, 3)
FIELD_LAYOUT = SubsystemLayout.build(("A", "field", 2), ("B", "field", 2))


@settings(max_examples=100)
@given(seeds, st.sampled_from(["A", "B"]))
def test_field_commuting_diagram(seed, keep):
    rho = random_density(FIELD_LAYOUT, rng_of(seed))
    joint = joint_optical_tomogram(rho, FIELD_GRID)
    lhs = reduce_tomogram(joint, (keep,)).values
    rhs = optical_tomogram(partial_trace(rho, (keep,)), FIELD_GRID).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10
    assert np.max(np.abs(joint.normalization() - 1)) <= 1e-6
    assert joint.values.min() >= 0


def brute_force_tei(rho):
    bases = {a: projector_basis(SPIN_OPERATORS[a]) for a in "xyz"}
    mis = []
    for a, b in itertools.product("xyz", repeat=2):
        table = np.array([[np.real(np.kron(bases[a][:, i], bases[b][:, j]).conj() @ rho
                                   @ np.kron(bases[a][:, i], bases[b][:, j])) for j in range(2)] for i in range(2)])
        pa, pb = table.sum(axis=1), table.sum(axis=0)
        mis.append(sum(table[i, j] * math.log(table[i, j] / (pa[i] * pb[j]))
                       for i in range(2) for j in range(2) if table[i, j] > 0))
    return float(np.mean(mis))


@settings(max_examples=100)
@given(seeds)
def test_xi_tei_spins_brute_force(seed):
    rho = random_density(SubsystemLayout.qubits(2), rng_of(seed))
    assert xi_tei_spins(rho) == pytest.approx(brute_force_tei(rho.matrix), abs=1e-9)


@settings(max_examples=100)
@given(seeds, st.integers(1, 4))
def test_spin_normalization_and_mi_nonnegative(seed, k):
    rho = random_density(SubsystemLayout.qubits(k), rng_of(seed), rank=1 + seed % 3)
    t = spin_tomogram(rho)
    sums = t.values.reshape((3,) * k + (-1,)).sum(axis=-1)
    assert np.max(np.abs(sums - 1)) <= 1e-10
    if k > 1:
        assert all(v.mi >= -1e-10 for v in spin_setting_values(t))


@settings(max_examples=100)
@given(st.lists(st.floats(0, 5), min_size=1, max_size=30), st.floats(0.01, 100))
def test_xi_tei_prime_scaling_and_bound(values, scale):
    # the strict filter is discontinuous where a value sits on mean + std
    cut = np.mean(values) + np.std(values)
    assume(all(abs(v - cut) > 1e-9 * (1 + cut) for v in values))
    base = xi_tei_prime(values)
    assert base >= np.mean(values) - 1e-12
    assert xi_tei_prime([v * scale for v in values]) == pytest.approx(base * scale, rel=1e-9, abs=1e-12)


@settings(max_examples=50)
@given(seeds, st.integers(2, 5), st.integers(2, 5))
def test_discrete_mi_nonnegative(seed, m, n):
    p = rng_of(seed).random((m, n))
    assert mutual_information(p / p.sum()) >= -1e-10


angles = st.floats(-math.pi, math.pi, allow_nan=False)


@st.composite
def circuits(draw):
    n = draw(st.integers(1, 4))
    c = Circuit(n, n)
    for _ in range(draw(st.integers(0, 12))):
        kind = draw(st.sampled_from([GateKind.H, GateKind.X, GateKind.S, GateKind.SDG, GateKind.U3,
                                     GateKind.CNOT, GateKind.SWAP, GateKind.BARRIER]))
        if kind in (GateKind.CNOT, GateKind.SWAP):
            if n < 2:
                continue
            targets = tuple(draw(st.permutations(range(n)))[:2])
        elif kind is GateKind.BARRIER:
            targets = tuple(sorted(draw(st.sets(st.integers(0, n - 1), min_size=1))))
        else:
            targets = (draw(st.integers(0, n - 1)),)
        params = (abs(draw(angles)), draw(angles), draw(angles)) if kind is GateKind.U3 else ()
        c.append(Gate(kind, targets, params))
    for q in draw(st.permutations(range(n)))[: draw(st.integers(0, n))]:
        c.measure(q, q)
    return c


@settings(max_examples=100)
@given(circuits())
def test_qasm_round_trip(c):
    text = emit_qasm(c)
    assert parse_qasm(text) == c
    assert emit_qasm(parse_qasm(text)) == text


@settings(max_examples=50)
@given(circuits(), seeds, st.integers(1, 500))
def test_simulation_invariants(c, seed, shots):
    assert abs(np.linalg.norm(run_statevector(c).amplitudes) - 1) <= 1e-12
    for g in c.unitary_part():
        m = gate_matrix(g)
        assert np.allclose(m @ m.conj().T, np.eye(len(m)), atol=1e-12)
    if c.measured_qubits():
        t = sample_counts(c, shots, seed)
        assert sum(t.counts.values()) == shots
        assert sample_counts(c, shots, seed) == t


def test_model_eigensystems_reconstruct():
    for H in (build_hdjc(ModelParams(n_max=1)), build_hdjc(ModelParams.from_detuning(1.0, 2), "lab"),
              build_hdtc(ModelParams(n_max=2)), build_hdtc(ModelParams.from_detuning(1.0, 2))):
        err = np.linalg.norm(H.eigensystem.reconstruct() - H.matrix) / np.linalg.norm(H.matrix)
        assert err <= 1e-9


def jc_pair_propagator(t, delta=0.0):
    """Single cavity (field dim 2) with one atom, interaction frame, ordered (field, atom)."""
    lay = SubsystemLayout.build(("A", "field", 2), ("C", "qubit"))
    h = np.zeros((4, 4), dtype=complex)
    # basis |n, s>: index 2n + s, s = 1 excited
    h[0, 0] = h[2, 2] = delta / 2
    h[1, 1] = h[3, 3] = -delta / 2
    h[2, 1] = h[1, 2] = 1.0
    return HermitianOperator(h, lay).eigensystem.propagator(t)


@pytest.mark.parametrize("delta", [0.0, 1.0])
def test_djc_factorizes_into_two_jc_pairs(delta):
    m = djc_model(delta=delta)
    # |0;0;psi0> = (|0,g>_AC |0,g>_BD + |0,e>_AC |0,e>_BD)/sqrt(2) in pair ordering (A, C, B, D)
    g0, e0 = np.array([1, 0, 0, 0]), np.array([0, 1, 0, 0])
    for t in np.linspace(0, 6 * np.pi, 31):
        U = jc_pair_propagator(t, delta)
        pairs = (np.kron(U @ g0, U @ g0) + np.kron(U @ e0, U @ e0)) / np.sqrt(2)
        # reorder (A, C, B, D) -> (A, B, C, D)
        assembled = pairs.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(-1)
        fid = PureState(assembled, m.psi0.layout).fidelity(evolve(m.hamiltonian, m.psi0, t))
        assert fid >= 1 - 1e-10


def test_qmi_is_frame_independent():
    lab, inter = djc_model(delta=1.0, frame="lab"), djc_model(delta=1.0)
    for t in np.linspace(0, 3, 7):
        a, b = evolve(lab.hamiltonian, lab.psi0, t), evolve(inter.hamiltonian, inter.psi0, t)
        for part in lab.partitions.values():
            assert xi_qmi(a, part) == pytest.approx(xi_qmi(b, part), abs=1e-9)


def test_excitations_conserved_and_norm_kept_over_run():
    for m in (djc_model(), dtc_model(initial="psi0_phi0")):
        ops = [excitation_operator(m.psi0.layout, f) for f in ("A", "B")]
        start = [m.psi0.expectation(op) for op in ops]
        for k in range(300):
            psi = evolve(m.hamiltonian, m.psi0, k * 0.02 * np.pi)
            assert abs(np.linalg.norm(psi.amplitudes) - 1) <= 1e-10
            if k % 30 == 0:
                assert [psi.expectation(op) for op in ops] == pytest.approx(start, abs=1e-10)

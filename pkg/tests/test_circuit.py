import math

import numpy as np
import pytest

from tomoent.circuit import (
    BIT_TO_OUTCOME,
    RECIPES,
    Circuit,
    CountsTable,
    Gate,
    GateKind,
    basis_change,
    build_bell_prep,
    build_djc_equiv,
    build_dtc_prep,
    exact_tomogram,
    gate_matrix,
    outcome_probabilities,
    run_statevector,
    run_tomography,
    sample_counts,
    settings_for,
    tomogram_from_counts,
    tomography_circuits,
)
from tomoent.hilbert import partial_trace
from tomoent.indicators import xi_tei_spins
from tomoent.tomography import spin_tomogram

LN2 = math.log(2)


def dense_unitary(circuit):
    """Full 2^n matrix built column by column from basis-state bit manipulation."""
    n = circuit.num_qubits
    U = np.eye(2 ** n, dtype=complex)
    for g in circuit.unitary_part():
        m = gate_matrix(g)
        k = len(g.targets)
        G = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for col in range(2 ** n):
            bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
            sub_in = sum(bits[q] << (k - 1 - j) for j, q in enumerate(g.targets))
            for sub_out in range(2 ** k):
                out = list(bits)
                for j, q in enumerate(g.targets):
                    out[q] = (sub_out >> (k - 1 - j)) & 1
                row = sum(b << (n - 1 - q) for q, b in enumerate(out))
                G[row, col] += m[sub_out, sub_in]
        U = G @ U
    return U


def test_u3_examples():
    a = gate_matrix(Gate(GateKind.U3, (0,), (np.pi, 0, np.pi / 2)))
    assert np.allclose(a, [[0, -1j], [1, 0]])
    b = gate_matrix(Gate(GateKind.U3, (0,), (np.pi, np.pi / 2, np.pi)))
    assert np.allclose(b, a.conj().T)
    assert np.allclose(gate_matrix(Gate(GateKind.SDG, (0,))) @ [0, 1], [0, -1j])


@pytest.mark.parametrize("kind", [k for k in GateKind if k not in (GateKind.MEASURE, GateKind.BARRIER)])
def test_gate_matrices_unitary(kind):
    arity = 2 if kind in (GateKind.CNOT, GateKind.SWAP) else 1
    params = (1.1, 0.4, 2.9) if kind is GateKind.U3 else ()
    m = gate_matrix(Gate(kind, tuple(range(arity)), params))
    assert np.allclose(m @ m.conj().T, np.eye(2 ** arity), atol=1e-12)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(GateKind.U3, (0,), (1.0, 2.0))
    with pytest.raises(ValueError):
        Gate(GateKind.H, (0,), (1.0,))
    with pytest.raises(ValueError):
        Gate(GateKind.CNOT, (1, 1))
    with pytest.raises(ValueError):
        Gate(GateKind.U3, (0,), (4.0, 0, 0))
    with pytest.raises(ValueError):
        gate_matrix(Gate(GateKind.MEASURE, (0,), clbit=0))
    g = Gate(GateKind.U3, (0,), (-1.0, 0.0, 0.0))
    assert np.allclose(gate_matrix(g), gate_matrix(Gate(GateKind.U3, (0,), (1.0, np.pi, np.pi))))
    assert np.allclose(gate_matrix(g), [[np.cos(-0.5), -np.sin(-0.5)], [np.sin(-0.5), np.cos(-0.5)]])


def test_circuit_validation():
    c = Circuit(2, 1).h(0).measure(0, 0)
    with pytest.raises(ValueError):
        c.x(0)
    with pytest.raises(IndexError):
        c.x(2)
    with pytest.raises(IndexError):
        Circuit(1, 1).measure(0, 1)
    c.x(1)
    c.barrier()


def test_empty_and_bell():
    assert np.allclose(run_statevector(Circuit(3)).amplitudes, np.eye(8)[0])
    assert np.allclose(run_statevector(build_bell_prep()).amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


@pytest.mark.parametrize("name", sorted(RECIPES))
def test_statevector_matches_dense_unitary(name):
    c = RECIPES[name].build()
    psi = run_statevector(c).amplitudes
    assert np.allclose(psi, dense_unitary(c)[:, 0], atol=1e-12)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


def test_dtc_prep_tensor_assembly():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(run_statevector(build_dtc_prep()).amplitudes, np.kron(bell, bell))


def test_outcome_probabilities_clbit_order():
    c = Circuit(2, 2).x(1).measure(1, 0).measure(0, 1)
    probs = outcome_probabilities(c)
    assert probs["10"] == pytest.approx(1.0)
    assert sum(probs.values()) == pytest.approx(1.0)


def test_bell_counts():
    c = Circuit(2, 2, build_bell_prep().gates).measure(0, 0).measure(1, 1)
    t = sample_counts(c, 8192, seed=11)
    f = t.frequencies()
    assert abs(f["00"] - 0.5) < 0.02 and abs(f["11"] - 0.5) < 0.02
    assert "01" not in t.counts and "10" not in t.counts
    assert sample_counts(c, 8192, seed=11) == t
    assert sum(sample_counts(c, 1, seed=2).counts.values()) == 1
    with pytest.raises(ValueError):
        sample_counts(c, 0)


@pytest.mark.parametrize("shots", [2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13])
def test_total_variation_bound(shots):
    c = Circuit(4, 4, build_djc_equiv(1.0).gates)
    for q in range(4):
        c.measure(q, q)
    exact = outcome_probabilities(c)
    f = sample_counts(c, shots, seed=shots).frequencies()
    tv = 0.5 * sum(abs(exact[k] - f.get(k, 0.0)) for k in exact)
    assert tv <= 5 / math.sqrt(shots)


def test_counts_table_invariant():
    with pytest.raises(ValueError):
        CountsTable(("z",), {"0": 3}, 4)
    a = CountsTable(("z",), {"0": 3}, 3)
    assert a.merge(CountsTable(("z",), {"1": 2}, 2)) == CountsTable(("z",), {"0": 3, "1": 2}, 5)


def test_basis_change_examples():
    assert basis_change("z") == []
    plus = Circuit(1).h(0).extend(basis_change("x", 0))
    assert np.allclose(np.abs(run_statevector(plus).amplitudes) ** 2, [1, 0])
    y_plus = Circuit(1).h(0).s(0).extend(basis_change("y", 0))
    assert np.allclose(np.abs(run_statevector(y_plus).amplitudes) ** 2, [1, 0])
    with pytest.raises(ValueError):
        basis_change("w")


def test_bit_to_outcome_mapping():
    # x: |+> (bit 0) has m = +1/2; z: |0> = |g> has m = -1/2; y: S^dag H maps |0> onto the m = -1/2 state
    assert BIT_TO_OUTCOME == {"x": (0, 1), "y": (1, 0), "z": (1, 0)}


def test_settings_order():
    assert settings_for(2)[:4] == [("x", "x"), ("x", "y"), ("x", "z"), ("y", "x")]
    assert len(tomography_circuits(build_dtc_prep(), (1, 2, 0, 3))) == 81


@pytest.mark.parametrize("name", sorted(RECIPES))
def test_exact_tomogram_matches_state_tomogram(name):
    r = RECIPES[name]
    c = r.build()
    exact = exact_tomogram(c, r.qubits, r.labels())
    oracle = spin_tomogram(partial_trace(run_statevector(c), r.labels()))
    # partial_trace keeps layout order; permute the oracle into readout order
    order = [oracle.labels.index(lab) for lab in r.labels()]
    k = len(order)
    values = np.transpose(oracle.values, order + [k + i for i in order])
    assert np.allclose(exact.values, values, atol=1e-12)


def test_exact_values():
    for name, want in (("bell", LN2 / 3), ("dtc", 2 * LN2 / 3)):
        r = RECIPES[name]
        t = exact_tomogram(r.build(), r.qubits, r.labels())
        assert xi_tei_spins(t, r.labels(r.blocks[0]), r.labels(r.blocks[1])) == pytest.approx(want, abs=1e-12)


def test_sampled_bell_tomogram():
    r = RECIPES["bell"]
    t = tomogram_from_counts(run_tomography(r.build(), r.qubits, 8192, seed=5), r.labels())
    assert t.shots == 8192
    assert abs(xi_tei_spins(t) - LN2 / 3) < 0.005


def test_deterministic_counts_table():
    c = Circuit(2).x(0)
    t = tomogram_from_counts(run_tomography(c, (0, 1), 100, seed=0))
    assert np.array_equal(t.probabilities(("z", "z")), [[0, 1], [0, 0]])


def test_tomogram_from_counts_errors():
    tabs = run_tomography(build_bell_prep(), (0, 1), 10, seed=0)
    with pytest.raises(ValueError):
        tomogram_from_counts(tabs[:-1])
    with pytest.raises(ValueError):
        tomogram_from_counts(tabs + tabs[:1])


@pytest.mark.parametrize("theta", [0.0, np.pi])
def test_djc_equiv_bell_endpoints(theta):
    c = build_djc_equiv(theta)
    t = exact_tomogram(c, (0, 3))
    assert xi_tei_spins(t) == pytest.approx(LN2 / 3, abs=1e-6)
    if theta == 0:
        red = partial_trace(run_statevector(c), ("q0", "q3")).matrix
        bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert np.allclose(red, np.outer(bell, bell), atol=1e-12)


def test_djc_equiv_rejects_large_theta():
    with pytest.raises(ValueError):
        build_djc_equiv(4.0)

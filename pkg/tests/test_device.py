import itertools

import numpy as np
import pytest

from gatesynth.device import (
    DeviceSpec,
    TransmonSpec,
    bare_map,
    dressed_map,
    drift_hamiltonian,
    pauli_decompose,
    pauli_reconstruct,
    relabel_map,
    transition_frequency,
)
from gatesynth.errors import DegeneracyError, DimensionError, InvalidInputError, NonHermitianError
from gatesynth.linalg import hermitian_eig

from oracles import register_to_bare_index

T1 = TransmonSpec(omega=5.0, anharmonicity=0.3, levels=5)
T2 = TransmonSpec(omega=4.5, anharmonicity=0.25, levels=5)
PAIR = DeviceSpec(transmons=(T1, T2), coupling=0.02)


def test_level_energies():
    assert [T1.energy(n) for n in range(5)] == pytest.approx(
        [0.0, 5.0, 9.7, 14.1, 18.2], abs=1e-10
    )
    assert [T2.energy(n) for n in range(5)] == pytest.approx(
        [0.0, 4.5, 8.75, 12.75, 16.5], abs=1e-10
    )


def test_energy_formula_random_parameters():
    rng = np.random.default_rng(7)
    for _ in range(50):
        omega = rng.uniform(3.0, 8.0)
        lam = rng.uniform(0.05, 0.5)
        t = TransmonSpec(omega=omega, anharmonicity=lam, levels=6)
        for n in range(6):
            assert t.energy(n) == pytest.approx(
                n * omega - n * (n - 1) / 2 * lam, abs=1e-10
            )


def test_transition_frequencies():
    assert [transition_frequency(T1, n, n + 1) for n in range(4)] == pytest.approx(
        [5.0, 4.7, 4.4, 4.1], abs=1e-10
    )
    assert [transition_frequency(T2, n, n + 1) for n in range(4)] == pytest.approx(
        [4.5, 4.25, 4.0, 3.75], abs=1e-10
    )


def test_transmon_validation():
    with pytest.raises(InvalidInputError):
        TransmonSpec(omega=-1.0, anharmonicity=0.3)
    with pytest.raises(InvalidInputError):
        TransmonSpec(omega=5.0, anharmonicity=0.0)
    with pytest.raises(InvalidInputError):
        TransmonSpec(omega=5.0, anharmonicity=6.0)
    with pytest.raises(InvalidInputError):
        TransmonSpec(omega=5.0, anharmonicity=0.3, levels=1)
    with pytest.raises(InvalidInputError):
        T1.energy(5)


def test_device_validation():
    with pytest.raises(InvalidInputError):
        DeviceSpec(transmons=())
    with pytest.raises(InvalidInputError):
        DeviceSpec(transmons=(T1,), coupling=0.01)
    with pytest.raises(InvalidInputError):
        DeviceSpec(transmons=(T1, T2), coupling=0.25)
    assert PAIR.n_transmons == 2
    assert PAIR.dimension == 25


def test_drift_single_transmon_is_diagonal():
    h = drift_hamiltonian(DeviceSpec(transmons=(T1,)))
    assert np.allclose(h, np.diag([0.0, 5.0, 9.7, 14.1, 18.2]), atol=1e-12)


def test_drift_two_transmon_structure():
    h = drift_hamiltonian(PAIR)
    assert h.shape == (25, 25)
    assert np.allclose(h, h.T, atol=1e-14)
    # diagonal is the kron-sum of the local energies
    for n1 in range(5):
        for n2 in range(5):
            assert h[5 * n1 + n2, 5 * n1 + n2] == pytest.approx(
                T1.energy(n1) + T2.energy(n2), abs=1e-12
            )
    # exchange element between |1,0> and |0,1> is J
    assert h[5, 1] == pytest.approx(0.02, abs=1e-14)
    # and scales with the ladder matrix elements: |2,1> <-> |1,2> is J*sqrt(2)*sqrt(2)
    assert h[11, 7] == pytest.approx(0.02 * 2.0, abs=1e-14)


def test_relabel_map_single():
    m = relabel_map(1)
    assert m.kind == "relabeled"
    assert m.computational_indices == (0, 1, 2, 3)
    assert np.array_equal(m.transform, np.eye(5))


def test_relabel_map_two_transmons_matches_bit_arithmetic():
    m = relabel_map(2)
    expected = tuple(
        register_to_bare_index(bits)
        for bits in itertools.product((0, 1), repeat=4)
    )
    assert m.computational_indices == expected
    assert expected == (0, 1, 2, 3, 5, 6, 7, 8, 10, 11, 12, 13, 15, 16, 17, 18)


def test_relabel_map_full_register_corner():
    # |11> on both transmons is bare level 3 of each: index 3*5 + 3
    assert relabel_map(2).computational_indices[15] == 18


def test_relabel_map_validation():
    with pytest.raises(InvalidInputError):
        relabel_map(3)
    with pytest.raises(InvalidInputError):
        relabel_map(1, levels=3)
    with pytest.raises(InvalidInputError):
        relabel_map(2, levels=(5, 3))


def test_bare_map_shares_indices():
    b = bare_map(2)
    assert b.kind == "bare"
    assert b.computational_indices == relabel_map(2).computational_indices


def test_dressed_map_labels_by_overlap():
    m = dressed_map(PAIR)
    assert m.kind == "dressed"
    assert len(m.computational_indices) == 16
    v = m.transform
    bare_indices = relabel_map(2).computational_indices
    for reg, col in enumerate(m.computational_indices):
        # the dressed register state is dominated by its bare counterpart;
        # high doubly-excited states hybridize hardest (|3,3> stays near 0.77)
        overlap = abs(v[bare_indices[reg], col]) ** 2
        assert overlap > 0.5
    for reg in (1, 4):
        col = m.computational_indices[reg]
        assert abs(v[bare_indices[reg], col]) ** 2 > 0.99


def test_dressed_map_transform_diagonalizes_drift():
    m = dressed_map(PAIR)
    h = drift_hamiltonian(PAIR)
    d = m.transform.conj().T @ h @ m.transform
    off = d - np.diag(np.diag(d))
    assert np.max(np.abs(off)) < 1e-12


def test_dressed_map_requires_coupled_pair():
    with pytest.raises(InvalidInputError):
        dressed_map(DeviceSpec(transmons=(T1,)))
    with pytest.raises(InvalidInputError):
        dressed_map(DeviceSpec(transmons=(T1, T2), coupling=0.0))


def test_dressed_map_degenerate_pair_raises():
    # identical transmons make |0,1> and |1,0> resonant; any coupling mixes
    # them half-and-half and the overlap labeling must refuse
    twin = DeviceSpec(transmons=(T1, T1), coupling=0.02)
    with pytest.raises(DegeneracyError):
        dressed_map(twin)


def test_pauli_roundtrip_random():
    rng = np.random.default_rng(40)
    for _ in range(20):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = (a + a.conj().T) / 2
        coeffs = pauli_decompose(h)
        assert np.max(np.abs(pauli_reconstruct(coeffs) - h)) < 1e-10


def test_pauli_decompose_drift_coefficients():
    # single-transmon drift restricted to the register, relabeled as 2 qubits:
    # II, IZ, ZI, ZZ coefficients derived by hand from the level energies
    # (E0 + E1 + E2 + E3)/4 etc. with E = 0, 5, 9.7, 14.1
    h0 = drift_hamiltonian(DeviceSpec(transmons=(T1,)))[:4, :4]
    coeffs = pauli_decompose(h0)
    assert coeffs["II"] == pytest.approx(7.2, abs=1e-12)
    assert coeffs["IZ"] == pytest.approx(-2.35, abs=1e-12)
    assert coeffs["ZI"] == pytest.approx(-4.7, abs=1e-12)
    assert coeffs["ZZ"] == pytest.approx(-0.15, abs=1e-12)
    for label, c in coeffs.items():
        if label not in ("II", "IZ", "ZI", "ZZ"):
            assert c == pytest.approx(0.0, abs=1e-14)


def test_pauli_decompose_drive_coefficients():
    # register block of (a + adag): IX and ZX from levels 0-1 and 2-3,
    # XX and YY from the 1-2 element sqrt(2)
    a = np.diag(np.sqrt([1.0, 2.0, 3.0]), k=1)
    drive = (a + a.T)[:4, :4]
    coeffs = pauli_decompose(drive)
    assert coeffs["IX"] == pytest.approx((1 + np.sqrt(3)) / 2, abs=1e-12)
    assert coeffs["ZX"] == pytest.approx((1 - np.sqrt(3)) / 2, abs=1e-12)
    assert coeffs["XX"] == pytest.approx(np.sqrt(2) / 2, abs=1e-12)
    assert coeffs["YY"] == pytest.approx(np.sqrt(2) / 2, abs=1e-12)


def test_pauli_decompose_validation():
    with pytest.raises(DimensionError):
        pauli_decompose(np.eye(5))
    with pytest.raises(NonHermitianError):
        pauli_decompose(np.diag([0, 1, 2, 3]) + np.diag([1j, 0, 0], k=1))


def test_dressed_energies_shift_by_level_repulsion():
    # the 0<->1 splitting of each transmon is pushed apart by roughly
    # 2 J^2 / Delta with Delta = 0.5 GHz
    s = hermitian_eig(drift_hamiltonian(PAIR))
    split = s.eigenvalues[2] - s.eigenvalues[1]
    assert split == pytest.approx(0.5 + 2 * 0.02**2 / 0.5, rel=0.05)

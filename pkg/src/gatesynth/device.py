"""Drift Hamiltonians and basis machinery for one or two coupled transmons.

Each transmon is an anharmonic ladder H0 = omega*ad*a - (lam/2)*ad*ad*a*a with
the anharmonicity stored as a positive magnitude, so the level energies are
E_n = n*omega - n*(n-1)*lam/2 and the 0->1, 1->2, 2->3 transitions of the
default device sit at 5.0, 4.7 and 4.4 GHz. The lowest four levels are
relabeled as two qubits via n = 2*Q1 + Q2; level 4 tracks leakage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyError, DimensionError, InvalidInputError, NonHermitianError
from .linalg import hermitian_eig, is_hermitian, kron, ladder_ops

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PAULI_LABELS = tuple(p + q for p in "IXYZ" for q in "IXYZ")


@dataclass(frozen=True)
class TransmonSpec:
    """Physical parameters of a single transmon.

    Attributes
    ----------
    omega : float
        0->1 transition frequency in GHz.
    anharmonicity : float
        Positive anharmonicity magnitude in GHz (level spacing shrinks by
        this much per level).
    levels : int
        Ladder truncation; 5 by default (four computational levels plus one
        leakage level). A 2-level truncation is allowed for analytic checks.
    """

    omega: float
    anharmonicity: float
    levels: int = 5

    def __post_init__(self) -> None:
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise InvalidInputError(f"omega must be positive, got {self.omega!r}")
        if not (np.isfinite(self.anharmonicity) and self.anharmonicity > 0):
            raise InvalidInputError(
                f"anharmonicity must be positive, got {self.anharmonicity!r}"
            )
        if self.anharmonicity >= self.omega:
            raise InvalidInputError(
                f"transmon limit requires anharmonicity < omega, got "
                f"{self.anharmonicity!r} >= {self.omega!r}"
            )
        if not isinstance(self.levels, (int, np.integer)) or self.levels < 2:
            raise InvalidInputError(f"levels must be an integer >= 2, got {self.levels!r}")

    def energy(self, n: int) -> float:
        """Level energy E_n = n*omega - n*(n-1)/2 * anharmonicity in GHz."""
        if not 0 <= n < self.levels:
            raise InvalidInputError(f"level {n} outside [0, {self.levels})")
        return n * self.omega - n * (n - 1) / 2 * self.anharmonicity


@dataclass(frozen=True)
class DeviceSpec:
    """One or two transmons with an optional exchange coupling.

    The coupling J multiplies (a1 + a1d)(a2 + a2d) and must stay well below
    both anharmonicities for the dressed-state labeling to be unambiguous.
    """

    transmons: tuple[TransmonSpec, ...]
    coupling: float = 0.0

    def __post_init__(self) -> None:
        transmons = tuple(self.transmons)
        object.__setattr__(self, "transmons", transmons)
        if len(transmons) not in (1, 2):
            raise InvalidInputError(
                f"DeviceSpec supports 1 or 2 transmons, got {len(transmons)}"
            )
        if not (np.isfinite(self.coupling) and self.coupling >= 0):
            raise InvalidInputError(f"coupling must be >= 0, got {self.coupling!r}")
        if len(transmons) == 1 and self.coupling != 0:
            raise InvalidInputError("single-transmon device must have coupling 0")
        if len(transmons) == 2:
            min_anh = min(t.anharmonicity for t in transmons)
            if self.coupling >= min_anh:
                raise InvalidInputError(
                    f"coupling {self.coupling!r} must be small against the weakest "
                    f"anharmonicity {min_anh!r}"
                )

    @property
    def n_transmons(self) -> int:
        return len(self.transmons)

    @property
    def dimension(self) -> int:
        dim = 1
        for t in self.transmons:
            dim *= t.levels
        return dim


@dataclass(frozen=True)
class BasisMap:
    """A basis choice for evaluating propagators.

    Attributes
    ----------
    kind : str
        One of ``bare``, ``dressed``, ``relabeled``.
    transform : ndarray
        Unitary change of basis (columns are the new basis states in the
        bare basis); identity for bare/relabeled.
    computational_indices : tuple of int
        Indices (in the `kind` basis) of the qubit-register states, ordered
        by the register bitstring; length 4 for one transmon, 16 for two.
    """

    kind: str
    transform: np.ndarray = field(repr=False)
    computational_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("bare", "dressed", "relabeled"):
            raise InvalidInputError(f"unknown basis kind {self.kind!r}")
        idx = tuple(int(i) for i in self.computational_indices)
        object.__setattr__(self, "computational_indices", idx)
        if len(idx) not in (4, 16) or len(set(idx)) != len(idx):
            raise InvalidInputError(
                "computational_indices must be 4 or 16 distinct indices, got "
                f"{self.computational_indices!r}"
            )
        t = np.asarray(self.transform)
        dev = np.max(np.abs(t.conj().T @ t - np.eye(t.shape[0])))
        if dev > 1e-10:
            raise InvalidInputError(f"basis transform not unitary, deviation {dev:.3e}")


def drift_hamiltonian(spec: DeviceSpec) -> np.ndarray:
    """Drift Hamiltonian of the device in GHz, in the bare product basis.

    Single transmon: ``omega*ad*a - (anharmonicity/2)*ad*ad*a*a`` (diagonal).
    Two transmons: the kron-sum of the local drifts plus the exchange term
    ``J*(a1 + a1d)(a2 + a2d)``; real symmetric.
    """
    locals_ = []
    for t in spec.transmons:
        a, ad = ladder_ops(t.levels)
        locals_.append(t.omega * (ad @ a) - t.anharmonicity / 2 * (ad @ ad @ a @ a))
    if spec.n_transmons == 1:
        return locals_[0]
    d1, d2 = (t.levels for t in spec.transmons)
    a1, a1d = ladder_ops(d1)
    a2, a2d = ladder_ops(d2)
    h = kron(locals_[0], np.eye(d2)) + kron(np.eye(d1), locals_[1])
    h = h + spec.coupling * kron(a1 + a1d, a2 + a2d)
    return h


def transition_frequency(spec: TransmonSpec, m: int, n: int) -> float:
    """|E_n - E_m| between two ladder levels, in GHz."""
    return abs(spec.energy(n) - spec.energy(m))


def _computational_indices(levels: tuple[int, ...]) -> tuple[int, ...]:
    # register order (Q1 Q2) per transmon, bare index n = 2*q1 + q2
    if len(levels) == 1:
        return (0, 1, 2, 3)
    d2 = levels[1]
    return tuple(d2 * (k >> 2) + (k & 3) for k in range(16))


def relabel_map(n_transmons: int, levels: int | tuple[int, ...] = 5) -> BasisMap:
    """Identity-basis map selecting the relabeled qubit register.

    The lowest four levels of each transmon are read as two qubits with
    n = 2*Q1 + Q2, so |0> = |00>, |1> = |01>, |2> = |10>, |3> = |11>. For two
    transmons the register order is (t1 Q1, t1 Q2, t2 Q1, t2 Q2).

    Parameters
    ----------
    n_transmons : int
        1 or 2.
    levels : int or tuple of int
        Ladder truncation per transmon (a single int applies to all); needed
        because the product-space indices depend on it.
    """
    if n_transmons not in (1, 2):
        raise InvalidInputError(f"relabel_map supports 1 or 2 transmons, got {n_transmons}")
    lv = (levels,) * n_transmons if isinstance(levels, (int, np.integer)) else tuple(levels)
    if len(lv) != n_transmons:
        raise InvalidInputError(
            f"got {len(lv)} level counts for {n_transmons} transmons"
        )
    if min(lv) < 4:
        raise InvalidInputError(f"relabeling needs at least 4 levels, got {lv}")
    dim = int(np.prod(lv))
    return BasisMap(
        kind="relabeled",
        transform=np.eye(dim, dtype=complex),
        computational_indices=_computational_indices(lv),
    )


def bare_map(n_transmons: int, levels: int | tuple[int, ...] = 5) -> BasisMap:
    """Same index selection as `relabel_map` but tagged as the bare basis."""
    m = relabel_map(n_transmons, levels)
    return BasisMap(
        kind="bare",
        transform=m.transform,
        computational_indices=m.computational_indices,
    )


def dressed_map(spec: DeviceSpec) -> BasisMap:
    """Eigenbasis of the coupled drift, labeled by maximal bare overlap.

    Each eigenvector of H0 + HJ is assigned to the bare product state with
    which it has the largest overlap. The assignment must be a bijection;
    if two eigenstates claim the same bare label the spectrum is effectively
    degenerate at the coupling and a DegeneracyError names the indices.

    Returns a BasisMap whose transform columns are the dressed states in
    bare-basis coordinates, ordered as eigenstates, and whose
    computational_indices list the dressed indices of the 16 register states
    in register order.
    """
    if spec.n_transmons != 2 or spec.coupling <= 0:
        raise InvalidInputError("dressed_map requires a two-transmon device with coupling > 0")
    h = drift_hamiltonian(spec)
    spectrum = hermitian_eig(h)
    v = spectrum.eigenvectors
    dim = v.shape[0]
    bare_label = np.argmax(np.abs(v), axis=0)
    # a near-tie between the two largest components means the bare label is
    # meaningless even when floating-point noise happens to break it
    mags = np.sort(np.abs(v), axis=0)
    ambiguous = mags[-2, :] > 0.95 * mags[-1, :]
    if np.any(ambiguous):
        cols = [int(c) for c in np.nonzero(ambiguous)[0]]
        raise DegeneracyError(
            f"dressed states {cols} have no dominant bare component; "
            "the spectrum is too degenerate for overlap labeling"
        )
    claimed: dict[int, int] = {}
    for col, lab in enumerate(bare_label):
        lab = int(lab)
        if lab in claimed:
            raise DegeneracyError(
                f"dressed states {claimed[lab]} and {col} both claim bare index {lab}; "
                "coupling is too strong for unambiguous labeling"
            )
        claimed[lab] = col
    if len(claimed) != dim:
        missing = sorted(set(range(dim)) - set(claimed))
        raise DegeneracyError(f"bare indices {missing} claimed by no dressed state")
    levels = tuple(t.levels for t in spec.transmons)
    comp = tuple(claimed[i] for i in _computational_indices(levels))
    return BasisMap(kind="dressed", transform=v, computational_indices=comp)


def pauli_decompose(h: np.ndarray) -> dict[str, float]:
    """Coefficients of a 4x4 Hermitian matrix over the two-qubit Pauli basis.

    Returns the 16 real coefficients c[PQ] = tr((P kron Q) @ h) / 4 keyed by
    two-letter labels 'II', 'IX', ..., 'ZZ'; the reconstruction
    sum(c[PQ] * P kron Q) equals `h`.
    """
    h = np.asarray(h)
    if h.shape != (4, 4):
        raise DimensionError(f"pauli_decompose requires a 4x4 matrix, got shape {h.shape}")
    if not is_hermitian(h):
        raise NonHermitianError("pauli_decompose requires a Hermitian matrix")
    out: dict[str, float] = {}
    for label in PAULI_LABELS:
        op = kron(PAULI[label[0]], PAULI[label[1]])
        out[label] = float(np.trace(op @ h).real) / 4.0
    return out


def pauli_reconstruct(coeffs: dict[str, float]) -> np.ndarray:
    """Inverse of `pauli_decompose`: sum of coefficient-weighted Pauli products."""
    h = np.zeros((4, 4), dtype=complex)
    for label, c in coeffs.items():
        h += c * kron(PAULI[label[0]], PAULI[label[1]])
    return h

"""Dense multilinear algebra on multipartite pure states and operators.

Conventions
-----------
All vectors and matrices live in the row-major product basis
``|l1 l2 ... lN>`` with party 1 the slowest index.  Complex conjugation of a
state and the operator-to-vector map are taken in this basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from .errors import ShapeError, ValidationError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    """Amplitude vector of an N-party pure state.

    ``amps`` has length ``prod(dims)``.  ``normalized`` records whether the
    vector is claimed to have unit norm; the claim is checked on construction.
    """

    dims: tuple
    amps: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise ShapeError(f"every party needs dimension >= 2, got {dims}")
        amps = _frozen(np.ravel(self.amps))
        if amps.size != prod(dims):
            raise ShapeError(f"{amps.size} amplitudes do not fit dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)
        if self.normalized and abs(np.vdot(amps, amps).real - 1.0) >= NORM_TOL:
            raise ValidationError("state flagged normalized but <psi|psi> != 1")

    @classmethod
    def from_tensor(cls, tensor, normalize=False):
        t = np.asarray(tensor, dtype=complex)
        st = cls(t.shape, t.ravel())
        return st.normalize() if normalize else st

    @property
    def n_parties(self):
        return len(self.dims)

    @property
    def dim(self):
        return self.amps.size

    @property
    def tensor(self):
        return self.amps.reshape(self.dims)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amps))

    def normalize(self):
        nrm = self.norm
        if nrm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return PureState(self.dims, self.amps / nrm, normalized=True)

    def projector(self):
        return np.outer(self.amps, self.amps.conj())


@dataclass(frozen=True)
class LocalOperatorTuple:
    """One square matrix per party.  Members may be singular."""

    ops: tuple

    def __post_init__(self):
        ops = tuple(_frozen(o) for o in self.ops)
        for k, o in enumerate(ops):
            if o.ndim != 2 or o.shape[0] != o.shape[1]:
                raise ShapeError(f"operator {k} is not square: shape {o.shape}")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def identity(cls, dims):
        return cls(tuple(np.eye(d) for d in dims))

    @property
    def dims(self):
        return tuple(o.shape[0] for o in self.ops)

    def __len__(self):
        return len(self.ops)

    def __getitem__(self, k):
        return self.ops[k]

    def replace(self, party, op):
        ops = list(self.ops)
        ops[party] = op
        return LocalOperatorTuple(tuple(ops))

    def scaled(self, factors):
        return LocalOperatorTuple(tuple(c * o for c, o in zip(factors, self.ops)))


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian matrix, optionally tagged with the dimensions of its parties."""

    entries: np.ndarray
    party_dims: tuple | None = None

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"operator must be square, got shape {m.shape}")
        if not is_hermitian(m):
            raise ValidationError("operator is not Hermitian")
        object.__setattr__(self, "entries", m)
        if self.party_dims is not None:
            pd = tuple(int(d) for d in self.party_dims)
            if prod(pd) != m.shape[0]:
                raise ShapeError(f"party dims {pd} do not multiply to {m.shape[0]}")
            object.__setattr__(self, "party_dims", pd)

    @property
    def dim(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite, unit-trace operator with party bookkeeping."""

    base: HermitianOperator
    party_dims: tuple = field(default=())

    def __post_init__(self):
        pd = tuple(self.party_dims) or self.base.party_dims or (self.base.dim,)
        if prod(pd) != self.base.dim:
            raise ShapeError(f"party dims {pd} do not multiply to {self.base.dim}")
        object.__setattr__(self, "party_dims", pd)
        m = self.base.entries
        if abs(np.trace(m).real - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {np.trace(m).real!r}, expected 1")
        if np.linalg.eigvalsh(m)[0] < -PSD_TOL:
            raise ValidationError("density matrix has a negative eigenvalue")

    @classmethod
    def from_matrix(cls, m, party_dims):
        m = np.asarray(m, dtype=complex)
        return cls(HermitianOperator((m + m.conj().T) / 2), tuple(party_dims))

    @classmethod
    def from_state(cls, state: PureState):
        st = state if state.normalized else state.normalize()
        return cls.from_matrix(st.projector(), st.dims)

    @property
    def entries(self):
        return self.base.entries

    @property
    def dim(self):
        return self.base.dim


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=tol)


def kron_all(mats):
    """Kronecker product of a sequence of arrays, first factor slowest."""
    out = np.ones((1, 1)) if np.ndim(mats[0]) == 2 else np.ones(1)
    for m in mats:
        out = np.kron(out, m)
    return out


def apply_local(ops: LocalOperatorTuple, state: PureState) -> PureState:
    """Return ``(ops[0] (x) ops[1] (x) ...)|state>`` without renormalizing."""
    if ops.dims != state.dims:
        raise ShapeError(f"operator dims {ops.dims} do not match state dims {state.dims}")
    t = state.tensor
    for k, op in enumerate(ops.ops):
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [k])), 0, k)
    return PureState(state.dims, t.ravel(), normalized=False)


def vectorize(op) -> np.ndarray:
    """Map ``Y = sum Y_ij |i><j|`` to ``|Y>> = sum Y_ij |i>|j>``."""
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ShapeError(f"vectorize needs a square matrix, got shape {op.shape}")
    return op.reshape(-1).copy()


def unvectorize(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).ravel()
    d = int(round(np.sqrt(vec.size)))
    if d * d != vec.size:
        raise ShapeError(f"length {vec.size} is not a perfect square")
    return vec.reshape(d, d).copy()


def conjugate_state(state: PureState) -> PureState:
    """Entrywise complex conjugate in the product basis."""
    return PureState(state.dims, state.amps.conj(), normalized=state.normalized)


def partial_transpose_matrix(m, dims: Sequence[int], parties) -> np.ndarray:
    """Transpose the listed subsystems of a matrix acting on ``prod(dims)``."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    m = np.asarray(m)
    if m.shape != (prod(dims), prod(dims)):
        raise ShapeError(f"matrix shape {m.shape} does not match dims {dims}")
    if isinstance(parties, (int, np.integer)):
        parties = (parties,)
    perm = list(range(2 * n))
    for p in parties:
        if not 0 <= p < n:
            raise ShapeError(f"party index {p} out of range for {n} parties")
        perm[p], perm[p + n] = perm[p + n], perm[p]
    return m.reshape(dims + dims).transpose(perm).reshape(m.shape)


def partial_transpose(rho, party) -> HermitianOperator:
    """Partial transpose of a density matrix (or party-tagged Hermitian operator)."""
    if isinstance(rho, DensityMatrix):
        dims, m = rho.party_dims, rho.entries
    else:
        if rho.party_dims is None:
            raise ShapeError("operator carries no party dimensions")
        dims, m = rho.party_dims, rho.entries
    return HermitianOperator(partial_transpose_matrix(m, dims, party), dims)


def hermitian_eig(h):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian operator."""
    m = h.entries if isinstance(h, (HermitianOperator, DensityMatrix)) else np.asarray(h)
    if not is_hermitian(m, tol=max(HERMITIAN_TOL, 1e-12 * np.abs(m).max(initial=0.0))):
        raise ValidationError("hermitian_eig called on a non-Hermitian matrix")
    return np.linalg.eigh(m)


def subsystem_permutation(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Index map taking a vector in ``dims`` order to one in ``order`` order.

    ``v_new = v_old[idx]`` reorders the tensor factors so that new factor ``k``
    is old factor ``order[k]``.
    """
    dims = tuple(dims)
    idx = np.arange(prod(dims)).reshape(dims).transpose(order)
    return idx.ravel()


def reorder_operator(m, dims, order):
    idx = subsystem_permutation(dims, order)
    return np.asarray(m)[np.ix_(idx, idx)]


def reorder_vector(v, dims, order):
    return np.asarray(v)[subsystem_permutation(dims, order)]


def schmidt_coefficients(state: PureState, cut: Sequence[int]) -> np.ndarray:
    """Singular values of the matricization ``cut | rest``."""
    rest = [k for k in range(state.n_parties) if k not in cut]
    t = state.tensor.transpose(list(cut) + rest)
    rows = prod(state.dims[k] for k in cut)
    return np.linalg.svd(t.reshape(rows, -1), compute_uv=False)

"""Projector SLOCC witnesses and their two-copy entanglement-witness embedding.

A SLOCC witness ``W = lam*1 - |phi><phi|`` is paired with the orbit
representative ``psi`` to form ``W (x) |psi*><psi*|`` on two copies of the
system.  Local operators ``Y`` of the orbit become product vectors
``|Y>> = sum_ij Y_ij |i>_1 |j>_2`` on the party-local pair of copies, and

    <eta|W|eta> = <<Y_1 ... Y_N| W (x) |psi*><psi*| |Y_1 ... Y_N>>,
    eta = (Y_1 (x) ... (x) Y_N)|psi>.

Matrices of embedded witnesses are stored in copy order ``(1_1..N_1)(1_2..N_2)``;
:meth:`EmbeddedWitness.grouped_matrix` reorders them to the party grouping
``(1_1 1_2)(2_1 2_2)...`` where product states are ordinary tensor products.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError
from .overlap import OptimizerConfig, maximize_slocc_overlap, overlap_objective
from .states import StateId, parse_state_id, representative
from .tensor import (
    DensityMatrix,
    HermitianOperator,
    LocalOperatorTuple,
    PureState,
    apply_local,
    conjugate_state,
    reorder_operator,
    reorder_vector,
    vectorize,
)

VERDICT_TOL = 1e-8


@dataclass(frozen=True)
class SloccWitness:
    lambda_param: float
    phi: PureState
    matrix: HermitianOperator
    orbit_rep: StateId | None = None

    @property
    def trivial(self):
        """lam >= 1 makes the operator positive semidefinite: it detects nothing."""
        return self.lambda_param >= 1.0

    @property
    def dims(self):
        return self.phi.dims


@dataclass(frozen=True)
class EmbeddedWitness:
    base: SloccWitness
    psi_conj: PureState
    matrix: HermitianOperator

    @property
    def local_dims(self):
        return self.base.dims

    @property
    def grouping_dims(self):
        """Dimensions of the two-copy parties (Y_1 Y_2), i.e. d_i^2."""
        return tuple(d * d for d in self.local_dims)

    @property
    def copy_order_dims(self):
        return self.local_dims * 2

    def grouped_order(self):
        n = len(self.local_dims)
        return [k for pair in zip(range(n), range(n, 2 * n)) for k in pair]

    def grouped_matrix(self):
        return reorder_operator(self.matrix.entries, self.copy_order_dims, self.grouped_order())


def build_witness(lam: float, phi: PureState, orbit_rep=None) -> SloccWitness:
    if not phi.normalized and abs(phi.norm - 1.0) >= 1e-12:
        raise ValidationError("witness projector state must be normalized")
    m = lam * np.eye(phi.dim) - phi.projector()
    orbit = parse_state_id(orbit_rep) if orbit_rep is not None else None
    return SloccWitness(float(lam), phi, HermitianOperator(m, phi.dims), orbit)


def embed(w: SloccWitness, psi: PureState) -> EmbeddedWitness:
    """``W (x) |psi*><psi*|`` on the two-copy space."""
    if psi.dims != w.dims:
        raise ShapeError(f"orbit representative dims {psi.dims} differ from witness dims {w.dims}")
    if abs(psi.norm - 1.0) >= 1e-12:
        raise ValidationError("orbit representative must be normalized")
    pc = conjugate_state(psi)
    m = np.kron(w.matrix.entries, pc.projector())
    return EmbeddedWitness(w, pc, HermitianOperator(m, w.dims * 2))


def expectation(rho, h) -> float:
    """``tr(rho H)`` for a density matrix, a pure state, or a raw matrix."""
    hm = h.entries if isinstance(h, HermitianOperator) else np.asarray(h)
    if isinstance(rho, PureState):
        v = rho.amps
        if v.size != hm.shape[0]:
            raise ShapeError("state and operator dimensions differ")
        val = np.vdot(v, hm @ v)
    else:
        rm = rho.entries if isinstance(rho, (DensityMatrix, HermitianOperator)) else np.asarray(rho)
        if rm.shape != hm.shape:
            raise ShapeError("density matrix and operator dimensions differ")
        val = np.sum(rm.T * hm)
    scale = max(1.0, abs(val))
    if abs(val.imag) > 1e-10 * scale:
        raise ValidationError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def doubled_product_vector(ops: LocalOperatorTuple) -> np.ndarray:
    """``|Y_1>> (x) ... (x) |Y_N>>`` in the party-grouped order."""
    v = np.ones(1, dtype=complex)
    for y in ops.ops:
        v = np.kron(v, vectorize(y))
    return v


def grouped_to_copy_order(vec, local_dims):
    """Reorder a vector from (1_1 1_2)(2_1 2_2)... to (1_1 2_1 ...)(1_2 2_2 ...)."""
    n = len(local_dims)
    grouped_dims = [d for d in local_dims for _ in range(2)]
    order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    return reorder_vector(vec, grouped_dims, order)


def theorem1_bridge(w: SloccWitness, psi: PureState, ops: LocalOperatorTuple):
    """Both sides of the two-copy identity, computed along disjoint paths.

    lhs: ``<eta|W|eta>`` with ``eta = (x)ops |psi>`` (tensor contraction, unnormalized).
    rhs: ``<<Y|W (x) |psi*><psi*||Y>>`` with the vectorized operators (Kronecker products).
    """
    eta = apply_local(ops, psi)
    lhs = expectation(eta, w.matrix)
    ew = embed(w, psi if abs(psi.norm - 1) < 1e-12 else psi.normalize())
    scale = psi.norm ** 2
    xi = grouped_to_copy_order(doubled_product_vector(ops), w.dims)
    rhs = float(np.vdot(xi, ew.matrix.entries @ xi).real) * scale
    return lhs, rhs


@dataclass
class Verdict:
    kind: str  # "witness" | "violated" | "trivial"
    lambda_param: float
    lambda_found: float
    restarts: int
    certificate: LocalOperatorTuple | None = None

    @property
    def label(self):
        if self.kind == "witness":
            return f"no violation found (restarts={self.restarts})"
        if self.kind == "violated":
            return f"violated: orbit state with squared overlap {self.lambda_found:.9f} > {self.lambda_param}"
        return "trivial: lambda >= 1 gives a positive semidefinite operator"


def verify_slocc_witness(w: SloccWitness, cfg: OptimizerConfig = OptimizerConfig()) -> Verdict:
    """Search the orbit of ``w.orbit_rep`` for a state on which the witness is negative."""
    if w.orbit_rep is None:
        raise ValidationError("witness carries no orbit representative")
    if w.trivial:
        return Verdict("trivial", w.lambda_param, float("nan"), 0)
    psi = representative(w.orbit_rep)
    res = maximize_slocc_overlap(w.phi, psi, cfg)
    if res.lam <= w.lambda_param + VERDICT_TOL:
        return Verdict("witness", w.lambda_param, res.lam, cfg.restarts)
    return Verdict("violated", w.lambda_param, res.lam, cfg.restarts, res.argmax)


def certificate_value(w: SloccWitness, verdict: Verdict) -> float:
    """Recompute the overlap reached by a violation certificate."""
    return overlap_objective(w.phi, representative(w.orbit_rep), verdict.certificate)


def witness_to_json(w: SloccWitness, verdict: Verdict | None = None, phi_id=None) -> str:
    doc = {
        "schemaVersion": 1,
        "kind": "slocc_witness",
        "lambda": w.lambda_param,
        "phi": str(phi_id) if phi_id is not None else
        [[float(a.real), float(a.imag)] for a in w.phi.amps],
        "dims": list(w.dims),
        "orbit": str(w.orbit_rep) if w.orbit_rep else None,
        "trivial": w.trivial,
    }
    if verdict is not None:
        doc["verdict"] = verdict.kind
        doc["diagnostics"] = {
            "label": verdict.label,
            "lambdaFound": None if np.isnan(verdict.lambda_found) else verdict.lambda_found,
            "restarts": verdict.restarts,
        }
        if verdict.certificate is not None:
            doc["diagnostics"]["certificate"] = [
                {"real": o.real.tolist(), "imag": o.imag.tolist()} for o in verdict.certificate.ops]
    return json.dumps(doc, indent=1)


def bestate_sigma(phi_b: PureState, psi_b: PureState, p: float) -> DensityMatrix:
    """PPT mixture detected by ``(lam*1 - |phi><phi|) (x) |psi*><psi*|`` for every lam < 1.

    ``phi_b`` lives on a d1 x d1 system, ``psi_b`` on d2 x d2.  The returned
    state is written in the grouping (A_1 A_2)(B_1 B_2), each party of
    dimension d1*d2.  The orthogonal complement term is normalized by its
    trace (d1^2 - 1)(d2^2 - 1) so that the mixture has unit trace.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError("mixing weight p must lie in [0, 1]")
    for s in (phi_b, psi_b):
        if s.n_parties != 2 or s.dims[0] != s.dims[1]:
            raise ShapeError("bestate inputs must be bipartite d x d states")
        if abs(s.norm - 1.0) >= 1e-12:
            raise ValidationError("bestate inputs must be normalized")
    d1, d2 = phi_b.dims[0], psi_b.dims[0]
    pphi = phi_b.projector()
    ppsi = conjugate_state(psi_b).projector()
    comp = np.kron(np.eye(d1 * d1) - pphi, np.eye(d2 * d2) - ppsi)
    sigma = (1 - p) / ((d1 * d1 - 1) * (d2 * d2 - 1)) * comp + p * np.kron(pphi, ppsi)
    copy_dims = (d1, d1, d2, d2)  # A_1 B_1 A_2 B_2
    grouped = reorder_operator(sigma, copy_dims, [0, 2, 1, 3])
    return DensityMatrix.from_matrix(grouped, (d1 * d2, d1 * d2))


"""PPT relaxation of the two-copy witness problem and a dense interior-point solver.

The relaxation reads::

    minimize   tr(rho W)
    subject to tr(rho) = 1,  rho >= 0,  rho^{T_b} >= 0  for every party b

with ``W`` the embedded witness written in the party grouping.  Its dual is::

    maximize   t
    subject to W - t*1 = Z_0 + sum_b Z_b^{T_b},   Z_0, Z_b >= 0

and the multipliers ``Z`` certify the bound: ``tr(rho W) >= t`` for every
feasible ``rho``.  Both problems are solved together by a primal-dual
path-following method (HKM search direction, Mehrotra predictor-corrector)
working directly on complex Hermitian matrices.  Each Newton step factors a
dense ``n^2 x n^2`` Schur complement, so memory grows as ``16 n^4`` bytes.
"""
from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from math import prod
from typing import Protocol

import numpy as np
import scipy.linalg as sla

from .errors import BudgetExceededError, ShapeError
from .overlap import OptimizerConfig, maximize_slocc_overlap
from .tensor import DensityMatrix, HermitianOperator, PureState, partial_transpose_matrix
from .witness import EmbeddedWitness, build_witness, embed

log = logging.getLogger(__name__)

DEFAULT_DIM_BUDGET = 128
# the Schur complement and the scratch copies built around it
DEFAULT_MEMORY_BUDGET = 2 * 1024 ** 3
FEASIBILITY_TOL = 1e-7


@dataclass(frozen=True)
class SdpProblem:
    objective: HermitianOperator
    party_dims: tuple
    pt_parties: tuple

    def __post_init__(self):
        pd = tuple(int(d) for d in self.party_dims)
        if prod(pd) != self.objective.dim:
            raise ShapeError(f"grouping {pd} does not multiply to {self.objective.dim}")
        object.__setattr__(self, "party_dims", pd)

    @property
    def dim(self):
        return self.objective.dim

    @property
    def n_constraints(self):
        """Number of partial-transpose PSD constraints (the PSD constraint on rho excluded)."""
        return len(self.pt_parties)

    def to_json(self):
        m = self.objective.entries
        return json.dumps({
            "schemaVersion": 1,
            "kind": "ppt_sdp",
            "partyDims": list(self.party_dims),
            "ptParties": list(self.pt_parties),
            "objective": {"real": m.real.tolist(), "imag": m.imag.tolist()},
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        m = np.array(d["objective"]["real"]) + 1j * np.array(d["objective"]["imag"])
        return cls(HermitianOperator(m, tuple(d["partyDims"])), tuple(d["partyDims"]),
                   tuple(d["ptParties"]))


@dataclass
class SdpSolution:
    value: float
    rho: DensityMatrix | None
    status: str  # "optimal" | "maxIter" | "infeasibleNumerics"
    gap: float
    dual_value: float
    dual_certificate: list | None = None
    iterations: int = 0
    residuals: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps({
            "schemaVersion": 1,
            "kind": "ppt_sdp_solution",
            "value": self.value,
            "dualValue": self.dual_value,
            "status": self.status,
            "gap": self.gap,
            "iterations": self.iterations,
            "residuals": self.residuals,
        })


def build_ppt_relaxation(w: EmbeddedWitness) -> SdpProblem:
    """PPT relaxation over the party grouping (1_1 1_2)(2_1 2_2)... of ``w``."""
    dims = w.grouping_dims
    obj = HermitianOperator(w.grouped_matrix(), dims)
    return SdpProblem(obj, dims, tuple(range(len(dims))))


def schur_memory_bytes(n):
    """Approximate peak memory of one interior-point iteration at matrix dimension ``n``."""
    return 3 * 16 * n ** 4


def check_budget(problem: SdpProblem, dim_budget=DEFAULT_DIM_BUDGET,
                 memory_budget=DEFAULT_MEMORY_BUDGET):
    n = problem.dim
    if n > dim_budget:
        raise BudgetExceededError(f"SDP dimension {n} exceeds the budget {dim_budget}")
    need = schur_memory_bytes(n)
    if need > memory_budget:
        raise BudgetExceededError(
            f"SDP dimension {n} needs about {need / 2 ** 30:.1f} GiB, budget is "
            f"{memory_budget / 2 ** 30:.1f} GiB")
    if n > 128:
        warnings.warn(f"SDP dimension {n} is above 128; expect long runtimes", RuntimeWarning)


class SdpSolver(Protocol):
    def solve(self, problem: SdpProblem, tol: float) -> SdpSolution: ...


def _herm(m):
    return (m + m.conj().T) / 2


def _pt_perm(dims, parties):
    n = prod(dims)
    idx = np.arange(n * n).reshape(n, n)
    return partial_transpose_matrix(idx, dims, parties).ravel()


def _factor(schur):
    """Cholesky factor of the Schur complement, retried once with a tiny diagonal shift."""
    shift = 1e-13 * float(np.abs(schur.diagonal()).max())
    for attempt in range(2):
        try:
            return sla.cho_factor(schur, lower=True, overwrite_a=attempt == 1, check_finite=False)
        except (np.linalg.LinAlgError, sla.LinAlgError):
            schur[np.diag_indices_from(schur)] += shift
    return None


def _max_step(x, dx):
    """Largest a <= 1 (scaled by 0.98) with x + a*dx PSD, given PD ``x``."""
    lo = np.linalg.cholesky(x)
    li = sla.solve_triangular(lo, np.eye(x.shape[0]), lower=True)
    ev = np.linalg.eigvalsh(_herm(li @ dx @ li.conj().T))[0]
    if ev >= 0:
        return 1.0
    return min(1.0, -0.98 / ev)


@dataclass
class InteriorPointSolver:
    """Dense primal-dual interior-point method for the PPT relaxation.

    Blocks are ``S_0 = rho`` and ``S_b = rho^{T_b}``.  Both sides stay
    feasible: ``rho`` starts maximally mixed and steps keep ``tr rho = 1``,
    and ``Z_0`` is always recomputed from the dual equality.  Convergence
    requires the relative gap and the dual residual to fall below ``tol``.
    """

    max_iter: int = 100
    dim_budget: int = DEFAULT_DIM_BUDGET
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def solve(self, problem: SdpProblem, tol: float = 1e-8) -> SdpSolution:
        check_budget(problem, self.dim_budget, self.memory_budget)
        w = problem.objective.entries
        n = problem.dim
        perms = [None] + [_pt_perm(problem.party_dims, b) for b in problem.pt_parties]
        nb = len(perms)

        def amap(k, x):
            p = perms[k]
            return x if p is None else x.reshape(-1)[p].reshape(n, n)

        rho = np.eye(n, dtype=complex) / n
        s = [amap(k, rho) for k in range(nb)]
        wscale = max(1.0, np.abs(w).max())
        # dual iterates are feasible by construction: Z_0 = W - t 1 - sum_b Z_b^{T_b}
        z = [None] + [np.eye(n, dtype=complex) * wscale for _ in range(nb - 1)]
        t = float(np.linalg.eigvalsh(w)[0]) - nb * wscale
        ident = np.eye(n, dtype=complex)
        ivec = ident.reshape(-1)

        def z0_of(z_, t_):
            return _herm(w - t_ * ident - sum(amap(k, z_[k]) for k in range(1, nb)))

        z[0] = z0_of(z, t)
        status, it = "maxIter", 0

        def residual_d(z_, t_):
            return w - t_ * ident - sum(amap(k, z_[k]) for k in range(nb))

        for it in range(1, self.max_iter + 1):
            rd = residual_d(z, t)
            pobj = float(np.vdot(rho, w).real)
            comp = sum(float(np.vdot(s[k], z[k]).real) for k in range(nb))
            mu = comp / (nb * n)
            rel_gap = abs(pobj - t) / (1 + abs(pobj) + abs(t))
            dinf = np.linalg.norm(rd) / (1 + np.linalg.norm(w))
            log.debug("it=%d pobj=%.10e dobj=%.10e mu=%.2e dinf=%.2e", it, pobj, t, mu, dinf)
            if rel_gap < tol and dinf < tol:
                status = "optimal"
                break

            try:
                sinv = [_herm(np.linalg.inv(sk)) for sk in s]
            except np.linalg.LinAlgError:
                status = "infeasibleNumerics"
                break
            schur = np.zeros((n * n, n * n), dtype=complex)
            for k in range(nb):
                lk = np.kron(sinv[k], z[k].T)
                lk += np.kron(z[k], sinv[k].T)
                lk *= 0.5
                p = perms[k]
                if p is None:
                    schur += lk
                else:
                    schur += lk[np.ix_(p, p)]
                del lk
            cf = _factor(schur)
            del schur
            if cf is None:
                log.debug("Schur complement factorization failed at it=%d", it)
                status = "infeasibleNumerics"
                break
            m_i = sla.cho_solve(cf, ivec)
            tr_mi = float(np.sum(m_i.reshape(n, n).diagonal()).real)

            def direction(target, corr):
                # rhs of  M(drho) = sum_b A_b(target S^-1 - Z - corr) - R_d + dt * 1
                g = -rd.copy()
                for k in range(nb):
                    inner = target * sinv[k] - z[k]
                    if corr is not None:
                        inner = inner - corr[k]
                    g += amap(k, inner)
                m_g = sla.cho_solve(cf, g.reshape(-1))
                rp = 1.0 - float(np.trace(rho).real)
                dt = (rp - float(np.sum(m_g.reshape(n, n).diagonal()).real)) / tr_mi
                drho = _herm((m_g + dt * m_i).reshape(n, n))
                ds = [amap(k, drho) for k in range(nb)]
                dz = []
                for k in range(nb):
                    h = sinv[k] @ ds[k] @ z[k]
                    d = target * sinv[k] - z[k] - _herm(h)
                    if corr is not None:
                        d = d - corr[k]
                    dz.append(_herm(d))
                dz[0] = -dt * ident - sum(amap(k, dz[k]) for k in range(1, nb))
                return drho, ds, dz, dt

            try:
                # predictor
                drho, ds, dz, dt = direction(0.0, None)
                ap = min(_max_step(s[k], ds[k]) for k in range(nb))
                ad = min(_max_step(z[k], dz[k]) for k in range(nb))
                mu_aff = sum(float(np.vdot(s[k] + ap * ds[k], z[k] + ad * dz[k]).real)
                             for k in range(nb)) / (nb * n)
                sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
                corr = [_herm(sinv[k] @ ds[k] @ dz[k]) for k in range(nb)]
                # corrector
                drho, ds, dz, dt = direction(sigma * mu, corr)
                ap = min(_max_step(s[k], ds[k]) for k in range(nb))
                ad = min(_max_step(z[k], dz[k]) for k in range(nb))
            except np.linalg.LinAlgError:
                log.debug("step length computation failed at it=%d", it)
                status = "infeasibleNumerics"
                break
            log.debug("steps primal=%.3f dual=%.3f sigma=%.2e", ap, ad, sigma)
            if max(ap, ad) < 1e-12:
                status = "infeasibleNumerics"
                break
            rho = _herm(rho + ap * drho)
            s = [_herm(amap(k, rho)) for k in range(nb)]
            z = [None] + [_herm(z[k] + ad * dz[k]) for k in range(1, nb)]
            t = t + ad * dt
            z[0] = z0_of(z, t)

        rd = residual_d(z, t)
        pobj = float(np.vdot(rho, w).real)
        if status == "infeasibleNumerics":
            # breakdown close to the optimum is normal; judge the last iterate
            rel_gap = abs(pobj - t) / (1 + abs(pobj) + abs(t))
            if rel_gap < tol and np.linalg.norm(rd) / (1 + np.linalg.norm(w)) < tol:
                status = "optimal"
        rho = _herm(rho)
        rho = rho / np.trace(rho).real
        pobj = float(np.vdot(rho, w).real)
        dinf = float(np.linalg.norm(rd) / (1 + np.linalg.norm(w)))
        min_pt = min(float(np.linalg.eigvalsh(amap(k, rho))[0]) for k in range(nb))
        residuals = {"dualInfeasibility": dinf, "minEigenvalue": min_pt,
                     "trace": float(np.trace(rho).real)}
        try:
            dm = DensityMatrix.from_matrix(rho, problem.party_dims)
        except ValueError:
            dm = None
            if status == "optimal":
                status = "infeasibleNumerics"
        cert = [HermitianOperator(_herm(zk)) for zk in z] if status == "optimal" else None
        log.debug("sdp dim=%d status=%s it=%d value=%.3e gap=%.1e", n, status, it, pobj, pobj - t)
        return SdpSolution(pobj, dm, status, pobj - t, float(t), cert, it, residuals)


def solve(problem: SdpProblem, tol: float = 1e-8, solver: SdpSolver | None = None) -> SdpSolution:
    return (solver or InteriorPointSolver()).solve(problem, tol)


def ppt_bound_lambda(phi: PureState, psi: PureState, bisect_tol: float = 1e-3,
                     solver: SdpSolver | None = None, lower: float | None = None,
                     cfg: OptimizerConfig | None = None, solver_tol: float = 1e-8) -> float:
    """Smallest lam (to ``bisect_tol``) whose embedded witness has PPT minimum >= -1e-7.

    The result upper-bounds the maximal squared SLOCC overlap.  The bracket
    starts at ``[max(lower, 0), 1]``; ``lower`` defaults to the optimizer's
    lower bound.  A negative solve at ``lam`` yields a state ``rho`` whose
    own root ``tr(rho Q)/tr(rho P)`` (with ``W = lam P - Q``) is also
    infeasible, so the lower end jumps there when that is further.
    """
    if phi.dims != psi.dims:
        raise ShapeError(f"dims differ: {phi.dims} vs {psi.dims}")
    solver = solver or InteriorPointSolver()
    phi, psi = phi.normalize(), psi.normalize()
    if lower is None:
        cfg = cfg or OptimizerConfig(restarts=20, max_sweeps=300)
        lower = maximize_slocc_overlap(phi, psi, cfg).lam
    lo, hi = max(float(lower), 0.0), 1.0
    base_p = build_ppt_relaxation(embed(build_witness(1.0, phi), psi))
    base_q = build_ppt_relaxation(embed(build_witness(0.0, phi), psi))
    p_mat = base_p.objective.entries - base_q.objective.entries
    q_mat = -base_q.objective.entries
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        prob = SdpProblem(HermitianOperator(mid * p_mat - q_mat, base_p.party_dims),
                          base_p.party_dims, base_p.pt_parties)
        sol = solver.solve(prob, solver_tol)
        if sol.status != "optimal":
            raise ArithmeticError(f"SDP solve at lambda={mid:.6f} ended with status {sol.status}")
        if sol.value >= -FEASIBILITY_TOL:
            hi = mid
        else:
            lo = mid
            r = sol.rho.entries
            den = float(np.vdot(r, p_mat).real)
            if den > 0:
                root = float(np.vdot(r, q_mat).real) / den
                # rho still gives a value below -1e-7 slightly left of its root
                jump = root - 2 * FEASIBILITY_TOL / den
                if lo < jump < hi:
                    lo = jump
        log.debug("bisection bracket [%.6f, %.6f]", lo, hi)
    return hi

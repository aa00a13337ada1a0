"""Maximal squared overlap between a target state and the SLOCC orbit of another.

For a target ``phi`` and an orbit representative ``psi`` the quantity is::

    sup_{A_1..A_N}  |<phi| A_1 (x) ... (x) A_N |psi>|^2 / || A_1 (x) ... (x) A_N |psi> ||^2

With every party but one fixed, numerator and denominator are quadratic forms
in that party's matrix, and the ratio is maximized in closed form.  The
optimizer sweeps these block updates over all parties for many random starts
at once.  Because suprema are often only reached as the operators become
singular, each sweep is followed by a multiplicative extrapolation
``A -> R^p A`` along the last step ``R = A_new A_old^+`` (p = 2, 4, 8, ...),
accepted only when it improves the objective.  Every few sweeps the same
search also runs along the step accumulated over several sweeps, which
follows slowly degenerating operators much better than single steps.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateOperatorError, ShapeError
from .states import parse_state_id, representative
from .tensor import LocalOperatorTuple, PureState, apply_local

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 200
    max_sweeps: int = 2000
    convergence_tol: float = 1e-13
    # relative floor on singular values of the party subproblem
    regularization: float = 1e-12
    saturation_threshold: float = 1 - 1e-9
    seed: int = 0
    extrapolate: bool = True
    max_doublings: int = 30
    # every ``long_step`` sweeps, also extrapolate along the step accumulated
    # since the previous such point; single-sweep steps zig-zag in flat valleys
    long_step: int = 10
    # stop a restart once, after ``prune_after`` sweeps, its value extrapolated
    # linearly over ``prune_horizon`` more sweeps stays below the batch best;
    # progress and convergence are judged once per ``long_step`` window
    prune_after: int = 20
    prune_horizon: int = 100

    def __post_init__(self):
        if self.restarts < 1 or self.max_sweeps < 1:
            raise ValueError("restarts and max_sweeps must be positive")
        if not (self.convergence_tol > 0 and self.regularization > 0):
            raise ValueError("tolerances must be positive")
        if self.prune_after < 0 or self.prune_horizon < 0 or self.long_step < 0:
            raise ValueError("pruning parameters must be non-negative")
        if not 0 < self.saturation_threshold < 1:
            raise ValueError("saturation_threshold must lie in (0, 1)")

    def replace(self, **kw):
        d = asdict(self)
        d.update(kw)
        return OptimizerConfig(**d)


@dataclass
class OverlapResult:
    lam: float
    argmax: LocalOperatorTuple
    saturated: bool
    per_restart_values: list
    sweeps_used: list
    converged: list = field(default_factory=list)

    @property
    def best_restart(self):
        return int(np.argmax(self.per_restart_values))

    def to_dict(self, with_argmax=True):
        d = {
            "lambda": self.lam,
            "saturated": self.saturated,
            "perRestartValues": [float(v) for v in self.per_restart_values],
            "sweepsUsed": [int(s) for s in self.sweeps_used],
            "converged": [bool(c) for c in self.converged],
        }
        if with_argmax:
            d["argmax"] = [{"real": op.real.tolist(), "imag": op.imag.tolist()}
                           for op in self.argmax.ops]
        return d

    @classmethod
    def from_dict(cls, d):
        ops = tuple(np.array(o["real"]) + 1j * np.array(o["imag"]) for o in d.get("argmax", []))
        return cls(
            lam=float(d["lambda"]),
            argmax=LocalOperatorTuple(ops) if ops else None,
            saturated=bool(d["saturated"]),
            per_restart_values=list(d.get("perRestartValues", [])),
            sweeps_used=list(d.get("sweepsUsed", [])),
            converged=list(d.get("converged", [])),
        )


# ---------------------------------------------------------------------------
# batched kernels: leading axis indexes independent restarts

def _normalize(a):
    return a / np.linalg.norm(a, axis=(1, 2))[:, None, None]


def _apply_batch(t, ops, skip=None):
    """Apply per-restart local operators to a batch of state tensors (B, d1, ..., dN)."""
    b = t.shape[0]
    for k, a in enumerate(ops):
        if k == skip:
            continue
        t = np.moveaxis(t, k + 1, -1)
        shape = t.shape
        t = np.matmul(t.reshape(b, -1, shape[-1]), a.transpose(0, 2, 1)).reshape(shape)
        t = np.moveaxis(t, -1, k + 1)
    return t


def _objective_batch(phi_conj_flat, psi_b, ops):
    eta = _apply_batch(psi_b, ops).reshape(psi_b.shape[0], -1)
    num = np.abs(eta @ phi_conj_flat) ** 2
    den = np.einsum("bi,bi->b", eta.real, eta.real) + np.einsum("bi,bi->b", eta.imag, eta.imag)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(den > 0, num / np.where(den > 0, den, 1.0), -np.inf)
    return val


def _update_batch(phi_t, psi_b, ops, party, reg):
    """Closed-form maximizer for one party with the others fixed.

    With M the party-i matricization of the state after the other operators
    and F that of the target, the ratio |tr(A M F^+)|^2 / ||A M||_F^2 is
    maximized by A = F M^+ (any nonzero multiple); the pseudo-inverse uses
    Tikhonov-damped singular values s / (s^2 + (reg * s_max)^2) and drops
    those below ``reg * s_max``, which are roundoff in a rank-deficient M.
    """
    b = psi_b.shape[0]
    d = phi_t.shape[party]
    t = _apply_batch(psi_b, ops, skip=party)
    m = np.moveaxis(t, party + 1, 1).reshape(b, d, -1)
    f = np.moveaxis(phi_t, party, 0).reshape(d, -1)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    floor = (reg * s[:, :1]) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(s * s > floor, s / (s * s + floor), 0.0)
    a = np.matmul(f @ vh.conj().transpose(0, 2, 1) * inv[:, None, :], u.conj().transpose(0, 2, 1))
    nrm = np.linalg.norm(a, axis=(1, 2))
    # target orthogonal to everything reachable: keep the old operator
    keep = ~(nrm > 0)
    nrm[keep] = 1.0
    a = a / nrm[:, None, None]
    if keep.any():
        a[keep] = ops[party][keep]
    return a


def _sweep_batch(phi_t, psi_b, ops, reg):
    ops = list(ops)
    for k in range(len(ops)):
        ops[k] = _update_batch(phi_t, psi_b, ops, k, reg)
    return ops


def _extrapolate_batch(phi_t, phi_cf, psi_b, old, new, val, cfg):
    """Line search over powers of the last multiplicative step; returns improved ops/values."""
    steps = [_normalize(n @ np.linalg.pinv(o)) for o, n in zip(old, new)]
    best_ops = [n.copy() for n in new]
    best = val.copy()
    live = np.arange(val.size)
    for _ in range(cfg.max_doublings):
        steps = [_normalize(r @ r) for r in steps]
        cand = [_normalize(r @ o[live]) for r, o in zip(steps, old)]
        if not all(np.isfinite(c).all() for c in cand):
            ok = np.all([np.isfinite(c).all(axis=(1, 2)) for c in cand], axis=0)
            live, steps, cand = live[ok], [r[ok] for r in steps], [c[ok] for c in cand]
            if live.size == 0:
                break
        cand = _sweep_batch(phi_t, psi_b[: live.size], cand, cfg.regularization)
        v = _objective_batch(phi_cf, psi_b[: live.size], cand)
        better = v > best[live]
        if not better.any():
            break
        idx = live[better]
        for k in range(len(best_ops)):
            best_ops[k][idx] = cand[k][better]
        best[idx] = v[better]
        live, steps = idx, [r[better] for r in steps]
    return best_ops, best


def _initial_ops(dims, restarts, seed):
    ops = [np.empty((restarts, d, d), dtype=complex) for d in dims]
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        for k, d in enumerate(dims):
            ops[k][r] = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return [_normalize(o) for o in ops]


# ---------------------------------------------------------------------------
# public operations

def _check_pair(phi: PureState, psi: PureState):
    if phi.dims != psi.dims:
        raise ShapeError(f"target dims {phi.dims} differ from orbit dims {psi.dims}")


def overlap_objective(phi: PureState, psi: PureState, ops: LocalOperatorTuple) -> float:
    """|<phi|(x)ops|psi>|^2 / ||(x)ops|psi>||^2, with phi taken as given (normalize it first)."""
    _check_pair(phi, psi)
    eta = apply_local(ops, psi).amps
    den = float(np.vdot(eta, eta).real)
    scale = np.prod([np.linalg.norm(o) ** 2 for o in ops.ops]) * psi.norm ** 2
    if not den > 1e-28 * scale:
        raise DegenerateOperatorError("local operators annihilate the orbit representative")
    return float(abs(np.vdot(phi.amps, eta)) ** 2 / den)


def per_party_update(phi: PureState, psi: PureState, ops: LocalOperatorTuple, party: int,
                     regularization: float = 1e-12) -> np.ndarray:
    """Best matrix for ``party`` with all other operators held fixed (unit Frobenius norm)."""
    _check_pair(phi, psi)
    if not 0 <= party < len(ops):
        raise ShapeError(f"party {party} out of range")
    batch = [np.asarray(o, dtype=complex)[None] for o in ops.ops]
    a = _update_batch(phi.tensor, psi.tensor[None], batch, party, regularization)
    return a[0]


def maximize_slocc_overlap(phi: PureState, psi: PureState,
                           cfg: OptimizerConfig = OptimizerConfig()) -> OverlapResult:
    """Best squared overlap of ``phi`` with the SLOCC orbit of ``psi`` over ``cfg.restarts`` starts.

    The value is a lower bound on the supremum.  Results are deterministic
    for a fixed ``cfg.seed``; restart ``r`` is seeded by ``(seed, r)``.
    """
    _check_pair(phi, psi)
    phi = phi.normalize()
    dims, n_r = phi.dims, cfg.restarts
    phi_t = phi.tensor
    phi_cf = phi.amps.conj()
    psi_full = np.broadcast_to(psi.tensor, (n_r,) + dims)

    ops = _initial_ops(dims, n_r, cfg.seed)
    vals = _objective_batch(phi_cf, psi_full, ops)
    sweeps = np.zeros(n_r, dtype=int)
    done = np.zeros(n_r, dtype=bool)
    active = np.arange(n_r)
    # snapshots every long_step sweeps; extrapolate from 1, 2 and 4 snapshots back
    snapshots = [[o.copy() for o in ops]]
    window_vals = vals.copy()

    for it in range(1, cfg.max_sweeps + 1):
        if active.size == 0:
            break
        psi_b = psi_full[: active.size]
        old = [o[active] for o in ops]
        new = _sweep_batch(phi_t, psi_b, old, cfg.regularization)
        v = _objective_batch(phi_cf, psi_b, new)
        if cfg.extrapolate:
            new, v = _extrapolate_batch(phi_t, phi_cf, psi_b, old, new, v, cfg)
            if cfg.long_step and it % cfg.long_step == 0:
                for back in (1, 2, 4):
                    if back <= len(snapshots):
                        base = [o[active] for o in snapshots[-back]]
                        new, v = _extrapolate_batch(phi_t, phi_cf, psi_b, base, new, v, cfg)
        prev = vals[active]
        # block updates are monotone up to the damping; never step backwards
        worse = v < prev
        if worse.any():
            for k in range(len(new)):
                new[k][worse] = old[k][worse]
            v = np.where(worse, prev, v)
        for k in range(len(ops)):
            ops[k][active] = new[k]
        vals[active] = v
        sweeps[active] += 1
        if cfg.long_step and it % cfg.long_step == 0:
            snapshots = snapshots[-3:] + [[o.copy() for o in ops]]
        stop = v >= 1.0 - 1e-15
        window = cfg.long_step or 1
        if it % window == 0:
            # judge progress over a whole window, long-step extrapolation included
            gain = v - window_vals[active]
            window_vals[active] = v
            conv = gain <= cfg.convergence_tol * np.maximum(v, 1e-300)
            done[active[conv]] = True
            stop |= conv
            if cfg.prune_horizon and it >= cfg.prune_after:
                stop |= v + cfg.prune_horizon * gain / window < vals.max()
        done[active[v >= 1.0 - 1e-15]] = True
        active = active[~stop]

    vals = np.where(np.isfinite(vals), vals, 0.0)
    best = int(np.argmax(vals))
    lam = float(min(max(vals[best], 0.0), 1.0))
    argmax = LocalOperatorTuple(tuple(o[best].copy() for o in ops))
    return OverlapResult(
        lam=lam,
        argmax=argmax,
        saturated=lam >= cfg.saturation_threshold,
        per_restart_values=[float(x) for x in vals],
        sweeps_used=[int(s) for s in sweeps],
        converged=[bool(c) for c in done],
    )


# ---------------------------------------------------------------------------
# tables

@dataclass
class OverlapTable:
    """Entry ``(j, i)``: overlap of target ``ids[i]`` with the orbit of ``ids[j]``.

    Rows are orbits, columns are targets; the diagonal is ``None`` (self).
    """

    ids: list
    cells: dict
    config: OptimizerConfig | None = None

    def value(self, j, i):
        if i == j:
            return 1.0
        return self.cells[(j, i)].lam

    def saturated(self, j, i):
        return i != j and self.cells[(j, i)].saturated

    def values(self):
        n = len(self.ids)
        return np.array([[self.value(j, i) for i in range(n)] for j in range(n)])

    def saturated_mask(self):
        n = len(self.ids)
        return np.array([[self.saturated(j, i) for i in range(n)] for j in range(n)])

    def to_csv(self):
        head = ["orbit\\target"] + [str(s) for s in self.ids]
        lines = [",".join(head)]
        for j, row_id in enumerate(self.ids):
            row = [str(row_id)]
            for i in range(len(self.ids)):
                if i == j:
                    row.append("self")
                elif self.saturated(j, i):
                    row.append("1*")
                else:
                    row.append(f"{self.value(j, i):.6f}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json(self, with_argmax=True):
        cells = []
        for (j, i), res in sorted(self.cells.items()):
            d = {"orbit": str(self.ids[j]), "target": str(self.ids[i])}
            d.update(res.to_dict(with_argmax))
            cells.append(d)
        doc = {
            "schemaVersion": SCHEMA_VERSION,
            "kind": "overlap_table",
            "ids": [str(s) for s in self.ids],
            "config": asdict(self.config) if self.config else None,
            "cells": cells,
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("kind") != "overlap_table":
            raise ValueError("not an overlap table document")
        ids = [parse_state_id(s) for s in doc["ids"]]
        pos = {str(s): k for k, s in enumerate(ids)}
        cells = {}
        for c in doc["cells"]:
            cells[(pos[c["orbit"]], pos[c["target"]])] = OverlapResult.from_dict(c)
        cfg = OptimizerConfig(**doc["config"]) if doc.get("config") else None
        return cls(ids, cells, cfg)

    @classmethod
    def from_csv(cls, text):
        rows = [r.split(",") for r in text.strip().splitlines() if r.strip()]
        if len(rows) < 2 or len(rows[0]) != len(rows):
            raise ValueError("table CSV must be square with a header row and column")
        ids = [parse_state_id(s) for s in rows[0][1:]]
        cells = {}
        for j, row in enumerate(rows[1:]):
            if parse_state_id(row[0]) != ids[j] or len(row) != len(ids) + 1:
                raise ValueError(f"malformed table row {j + 1}")
            for i, cell in enumerate(row[1:]):
                cell = cell.strip()
                if i == j:
                    continue
                sat = cell.endswith("*")
                lam = float(cell.rstrip("*"))
                cells[(j, i)] = OverlapResult(lam, None, sat, [lam], [0], [True])
        return cls(ids, cells)


def _cell_job(args):
    j, i, target, orbit, cfg = args
    return (j, i), maximize_slocc_overlap(representative(target), representative(orbit), cfg)


def overlap_table(ids: Sequence, cfg: OptimizerConfig = OptimizerConfig(), jobs: int = 1,
                  progress=None) -> OverlapTable:
    """Maximal overlaps for every ordered pair of distinct catalog states."""
    sids = [parse_state_id(s) for s in ids]
    dims = {s.dims_of for s in sids}
    if len(dims) > 1:
        raise ShapeError(f"table states have mixed dimensions {sorted(dims)}")
    tasks = [(j, i, str(sids[i]), str(sids[j]), cfg)
             for j in range(len(sids)) for i in range(len(sids)) if i != j]
    cells = {}
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, res in pool.map(_cell_job, tasks):
                cells[key] = res
                if progress:
                    progress(key, res)
    else:
        for task in tasks:
            key, res = _cell_job(task)
            cells[key] = res
            if progress:
                progress(key, res)
    return OverlapTable(sids, cells, cfg)

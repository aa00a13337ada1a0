"""Maximal squared overlap between GHZ_N and the N-qubit W class.

W-class states are parametrized as::

    U_1 D_1 (x) ... (x) U_{N-2} D_{N-2} (x) U_{N-1} g (x) U_N D_N |W_N>

with ``D_i = diag(1, xt_i)``, ``g = [[x_N, x_0], [0, x_{N-1}]]`` and
``U_i = P(gamma_i) X(alpha_i) P(beta_i)``, where ``P(d) = diag(1, e^{id})``
and ``X(a) = exp(i a sigma_x)``.  The GHZ and W phase symmetries remove
every ``gamma_i`` and ``beta_N``, so parameters are stored for the index set
``I0 = (1, ..., N-2, N)`` only; positions in the arrays follow that order.

The witness ``(lam 1 - |GHZ><GHZ|) (x) |W><W|`` stays positive on two-copy
product states iff a 2 x 2 block ``Lambda`` is PSD, i.e. iff
``lam/N >= mu^2 / sum(xt^2) + nu^2``.  Maximizing the right-hand side gives
``3/4`` for N = 3 and ``1/2`` for N >= 4.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ValidationError
from .states import ghz_state, w_state
from .tensor import PureState, apply_local, LocalOperatorTuple


def phase_gate(delta):
    return np.diag([1.0, np.exp(1j * delta)])


def x_rotation(alpha):
    """``exp(i alpha sigma_x)``."""
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, 1j * s], [1j * s, c]])


@dataclass(frozen=True)
class WClassParams:
    n: int
    x_tilde: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray = None
    x0: complex = 0.0
    xn1: complex = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise ValidationError("the W-class parametrization needs N >= 3")
        xt = np.asarray(self.x_tilde, dtype=float)
        al = np.asarray(self.alpha, dtype=float)
        be = np.zeros(self.n - 1) if self.beta is None else np.asarray(self.beta, dtype=float)
        for name, arr in (("x_tilde", xt), ("alpha", al), ("beta", be)):
            if arr.shape != (self.n - 1,):
                raise ValidationError(f"{name} needs one entry per index in I0 ({self.n - 1})")
        if np.any(xt <= 0):
            raise ValidationError("x_tilde entries must be positive")
        if be[-1] != 0.0:
            raise ValidationError("beta_N is fixed to 0 by the W phase symmetry")
        object.__setattr__(self, "x_tilde", xt)
        object.__setattr__(self, "alpha", al)
        object.__setattr__(self, "beta", be)

    @property
    def index_set(self):
        """Party labels (1-based) of the stored parameters."""
        return tuple(range(1, self.n - 1)) + (self.n,)

    @property
    def sum_x(self):
        return float(np.sum(self.x_tilde ** 2))


def mu_nu_squared(p: WClassParams):
    n = p.n
    s, c = np.sin(p.alpha), np.cos(p.alpha)
    ph = p.x_tilde * np.exp(-1j * p.beta)
    t1 = t2 = 0.0
    for j in range(n - 1):
        rest = np.arange(n - 1) != j
        t1 = t1 + s[j] * ph[j] * np.prod(c[rest])
        t2 = t2 + c[j] * ph[j] * np.prod(s[rest])
    mu2 = (abs(t1) ** 2 + abs(t2) ** 2) / (2 * n)
    nu2 = (np.prod(c ** 2) + np.prod(s ** 2)) / (2 * n)
    return float(mu2), float(nu2)


def objective(p: WClassParams) -> float:
    """``N (mu^2 / sum(xt^2) + nu^2)``, whose supremum is the critical lambda."""
    mu2, nu2 = mu_nu_squared(p)
    return p.n * (mu2 / p.sum_x + nu2)


@dataclass(frozen=True)
class LambdaBlock:
    lambda_n: float
    mu_sq: float
    nu_sq: float
    sum_x: float
    matrix: np.ndarray = field(repr=False)

    @property
    def determinant(self):
        return float(np.linalg.det(self.matrix))

    @property
    def is_psd(self):
        """PSD test via ``det >= 0`` and ``tr >= 0`` (tolerance 1e-12)."""
        return self.determinant >= -1e-12 and float(np.trace(self.matrix)) >= -1e-12


def lambda_block(p: WClassParams, lambda_n: float) -> LambdaBlock:
    """The 2 x 2 block ``Lambda`` of the contracted witness.

    The block is derived with ``xt_N = 1``; other parameters are first
    rescaled to that gauge (``mu^2`` and ``sum(xt^2)`` scale together, so
    the PSD criterion is unchanged).
    """
    if lambda_n <= 0:
        raise ValidationError("lambda_N must be positive")
    scale = p.x_tilde[-1]
    q = WClassParams(p.n, p.x_tilde / scale, p.alpha, p.beta, p.x0, p.xn1)
    mu2, nu2 = mu_nu_squared(q)
    a = lambda_n / p.n
    tot = mu2 + nu2
    sx = q.sum_x - 1.0  # sum over i = 1..N-2
    mu, nu = np.sqrt(mu2), np.sqrt(nu2)
    m = np.array([
        [a * (1 + sx * mu2 / tot) - tot, sx * a * mu * nu / tot],
        [sx * a * mu * nu / tot, a * (1 + sx * nu2 / tot)],
    ])
    return LambdaBlock(float(lambda_n), mu2, nu2, q.sum_x, m)


def lambda_critical(n: int) -> float:
    if n < 3:
        raise ValidationError("critical lambda is defined for N >= 3")
    return 0.75 if n == 3 else 0.5


def closed_form_n3(x, alpha1, alpha3):
    """N = 3 objective with ``xt = (x, 1)`` and vanishing phases."""
    return 0.5 * (1 + x / (1 + x * x) * np.sin(2 * alpha1) * np.sin(2 * alpha3))


def vector_bound_chain(p: WClassParams):
    """Successive upper bounds on the objective (``beta = 0`` assumed).

    Returns ``(direct, projection_free, three_index)``: the objective written
    as ``N[(v0.v1)^2 + (v0.v2)^2 + nu^2]``, the bound with the projections
    replaced by ``|v1|^2 + |v2|^2``, and the fully reduced three-angle
    expression, which equals 1/2 for any angles.
    """
    n = p.n
    s, c = np.sin(p.alpha), np.cos(p.alpha)
    v0 = p.x_tilde / np.sqrt(p.sum_x)
    m = n - 1
    rest = [np.arange(m) != j for j in range(m)]
    v1 = np.array([s[j] * np.prod(c[rest[j]]) for j in range(m)]) / np.sqrt(2 * n)
    v2 = np.array([c[j] * np.prod(s[rest[j]]) for j in range(m)]) / np.sqrt(2 * n)
    nu2 = (np.prod(c ** 2) + np.prod(s ** 2)) / (2 * n)
    direct = n * ((v0 @ v1) ** 2 + (v0 @ v2) ** 2 + nu2)
    free = n * (v1 @ v1 + v2 @ v2 + nu2)
    s3, c3 = s[:3] ** 2, c[:3] ** 2
    three = 0.5 * (sum(c3[j] * np.prod(np.delete(s3, j)) + s3[j] * np.prod(np.delete(c3, j))
                       for j in range(3)) + np.prod(c3) + np.prod(s3))
    return float(direct), float(free), float(three)


def numeric_sup_check(n: int, trials: int = 200, seed=0, beta_free: bool = False) -> float:
    """Multi-start maximization of the critical-lambda objective.

    Variables are ``log xt`` and ``alpha`` (and ``beta`` except ``beta_N``
    when ``beta_free``).  Returns the best value found; it is not clamped.
    """
    if n < 3:
        raise ValidationError("numeric_sup_check needs N >= 3")
    m = n - 1
    rng = np.random.default_rng(seed)

    def unpack(v):
        beta = np.zeros(m)
        if beta_free:
            beta[:-1] = v[2 * m:]
        return WClassParams(n, np.exp(np.clip(v[:m], -30, 30)), v[m:2 * m], beta)

    def neg(v):
        return -objective(unpack(v))

    dim = 2 * m + (m - 1 if beta_free else 0)
    best = -np.inf
    for _ in range(trials):
        v0 = np.concatenate([rng.normal(0, 1, m), rng.uniform(0, np.pi / 2, m),
                             rng.uniform(-np.pi, np.pi, dim - 2 * m)])
        res = minimize(neg, v0, method="BFGS")
        best = max(best, -res.fun, -neg(v0))
    return float(best)


def wclass_state(p: WClassParams, u_n1=None) -> PureState:
    """Unnormalized W-class state for the parameters; ``u_n1`` is the unitary on party N-1."""
    n = p.n
    ops = []
    for pos, party in enumerate(p.index_set):
        u = x_rotation(p.alpha[pos]) @ phase_gate(p.beta[pos])
        ops.append((party, u @ np.diag([1.0, p.x_tilde[pos]])))
    g = np.array([[1.0, p.x0], [0.0, p.xn1]], dtype=complex)  # gauge x_N = 1
    ops.append((n - 1, (np.eye(2) if u_n1 is None else u_n1) @ g))
    ops.sort(key=lambda t: t[0])
    return apply_local(LocalOperatorTuple(tuple(o for _, o in ops)), w_state(n))


def contracted_witness(p: WClassParams, lambda_n: float) -> np.ndarray:
    """``<zeta| (lam 1 - |GHZ><GHZ|) (x) |W><W| |zeta>`` on the two copies of party N-1.

    ``zeta`` is the product of ``(U_i D_i (x) 1)|Phi+>`` over ``I0``.  Computed
    by direct tensor contraction, independently of ``mu`` and ``nu``.  In
    the gauge ``xt_N = 1`` its spectrum is that of ``Lambda`` together with
    ``lam/N * sum(xt^2)`` and ``lam/N``.
    """
    n = p.n
    ghz = ghz_state(n).tensor
    w = w_state(n).tensor
    vecs = {}
    for pos, party in enumerate(p.index_set):
        u = x_rotation(p.alpha[pos]) @ phase_gate(p.beta[pos])
        vecs[party - 1] = u @ np.diag([1.0, p.x_tilde[pos]])  # |Y>> as a 2 x 2 array
    keep = n - 2  # zero-based party N-1

    def contract(t1, t2):
        # <zeta| applied to |t1>_1 |t2>_2, leaving party N-1 of both copies open
        args = [t1, list(range(n)), t2, list(range(n, 2 * n))]
        for k, y in vecs.items():
            args += [y.conj(), [k, n + k]]
        return np.einsum(*args, [keep, n + keep])

    phi = contract(ghz, w).reshape(-1)
    # identity on copy 1 times |W><W| on copy 2, contracted with zeta
    m = np.zeros((4, 4), dtype=complex)
    basis = np.eye(2 ** n).reshape((2 ** n,) + (2,) * n)
    for e in basis:
        v = contract(e, w).reshape(-1)
        m += np.outer(v, v.conj())
    return lambda_n * m - np.outer(phi, phi.conj())


def critical_state_n3(tol=1e-9):
    """W-class state attaining the N = 3 maximum, rebuilt from the witness null vector.

    At ``alpha_1 = alpha_3 = pi/4``, ``x = 1`` and ``lam = 3/4`` the contracted
    witness has a zero eigenvalue; its eigenvector ``|Gamma>>`` gives the
    operator on party 2.  Returns the normalized state.
    """
    p = WClassParams(3, np.ones(2), np.full(2, np.pi / 4))
    wt = contracted_witness(p, 0.75)
    ev, vec = np.linalg.eigh((wt + wt.conj().T) / 2)
    if abs(ev[0]) > tol:
        raise ArithmeticError(f"contracted witness has no null vector (min eigenvalue {ev[0]:.3e})")
    gamma = vec[:, 0].reshape(2, 2)
    d = np.diag([1.0, 1.0])
    u = x_rotation(np.pi / 4)
    ops = LocalOperatorTuple((u @ d, gamma, u @ d))
    return apply_local(ops, w_state(3)).normalize()


def stated_maximizer_n3() -> PureState:
    """(|+++> + |--+> + |+-->)/sqrt(3)."""
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    v = sum(np.kron(np.kron(a, b), c) for a, b, c in
            ((plus, plus, plus), (minus, minus, plus), (plus, minus, minus)))
    return PureState((2, 2, 2), v / np.sqrt(3))


def ghz_overlap(state: PureState) -> float:
    st = state.normalize()
    return float(abs(np.vdot(ghz_state(st.n_parties).amps, st.amps)) ** 2)

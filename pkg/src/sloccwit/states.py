"""Named states and seeded random sampling.

State identifiers use a small string grammar shared with the CLI::

    psi6 ... psi17        fully entangled 2x3x3 class representatives
    ghz:N   w:N           N-qubit GHZ and W states (N >= 2); ``bell`` = ghz:2
    zero:d1xd2x...        the product state |00...0>
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import UnknownStateError, ValidationError
from .tensor import PureState

DIMS_233 = (2, 3, 3)

# Unnormalized integer amplitude patterns; every listed ket has amplitude 1.
CATALOG_233 = {
    6: ("000", "111"),
    7: ("000", "011", "101"),
    8: ("000", "011", "102"),
    9: ("000", "011", "120"),
    10: ("000", "011", "122"),
    11: ("000", "011", "101", "112"),
    12: ("000", "011", "110", "121"),
    13: ("000", "011", "102", "120"),
    14: ("000", "011", "112", "120"),
    15: ("000", "011", "100", "122"),
    16: ("000", "011", "022", "101"),
    17: ("000", "011", "022", "101", "112"),
}

PSI_IDS = tuple(f"psi{k}" for k in sorted(CATALOG_233))


@dataclass(frozen=True)
class StateId:
    tag: str  # "psi", "ghz", "w", "zero", "custom"
    index: int | None = None
    dims: tuple | None = None

    def __post_init__(self):
        if self.tag == "psi" and self.index not in CATALOG_233:
            raise UnknownStateError(f"no 2x3x3 representative psi{self.index}")
        if self.tag in ("ghz", "w") and (self.index is None or self.index < 2):
            raise UnknownStateError(f"{self.tag} needs N >= 2 qubits")
        if self.tag == "zero" and (not self.dims or any(d < 2 for d in self.dims)):
            raise UnknownStateError("zero state needs dimensions >= 2")
        if self.tag not in ("psi", "ghz", "w", "zero", "custom"):
            raise UnknownStateError(f"unknown state tag {self.tag!r}")

    @property
    def dims_of(self):
        if self.tag == "psi":
            return DIMS_233
        if self.tag in ("ghz", "w"):
            return (2,) * self.index
        return self.dims

    def __str__(self):
        if self.tag == "psi":
            return f"psi{self.index}"
        if self.tag in ("ghz", "w"):
            return f"{self.tag}:{self.index}"
        if self.tag == "zero":
            return "zero:" + "x".join(map(str, self.dims))
        return "custom"


_ID_RE = re.compile(r"^(?:psi(\d+)|(ghz|w):(\d+)|zero:(\d+(?:x\d+)*)|bell|custom)$")


def parse_state_id(text) -> StateId:
    if isinstance(text, StateId):
        return text
    s = str(text).strip().lower()
    m = _ID_RE.match(s)
    if not m:
        raise UnknownStateError(f"cannot parse state id {text!r}")
    if s == "bell":
        return StateId("ghz", 2)
    if s == "custom":
        return StateId("custom")
    if m.group(1):
        return StateId("psi", int(m.group(1)))
    if m.group(2):
        return StateId(m.group(2), int(m.group(3)))
    return StateId("zero", dims=tuple(int(d) for d in m.group(4).split("x")))


def _from_pattern(dims, kets):
    t = np.zeros(dims, dtype=complex)
    for ket in kets:
        t[tuple(int(c) for c in ket)] += 1.0
    return PureState.from_tensor(t, normalize=True)


def ghz_state(n):
    t = np.zeros((2,) * n, dtype=complex)
    t[(0,) * n] = t[(1,) * n] = 1.0
    return PureState.from_tensor(t, normalize=True)


def w_state(n):
    t = np.zeros((2,) * n, dtype=complex)
    for k in range(n):
        idx = [0] * n
        idx[k] = 1
        t[tuple(idx)] = 1.0
    return PureState.from_tensor(t, normalize=True)


def representative(state_id) -> PureState:
    """Normalized state for a catalog identifier (``StateId`` or its string form)."""
    sid = parse_state_id(state_id)
    if sid.tag == "psi":
        return _from_pattern(DIMS_233, CATALOG_233[sid.index])
    if sid.tag == "ghz":
        return ghz_state(sid.index)
    if sid.tag == "w":
        return w_state(sid.index)
    if sid.tag == "zero":
        t = np.zeros(sid.dims, dtype=complex)
        t[(0,) * len(sid.dims)] = 1.0
        return PureState.from_tensor(t, normalize=True)
    raise UnknownStateError("custom states have no catalog entry")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_ginibre(d, seed):
    """d x d matrix with i.i.d. complex standard normal entries (E|z|^2 = 1)."""
    if d < 1:
        raise ValidationError("Ginibre dimension must be >= 1")
    rng = _rng(seed)
    return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)


def random_ket(d, seed):
    rng = _rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_product_state(dims, seed) -> PureState:
    """Tensor product of independent Haar-random local kets."""
    rng = _rng(seed)
    t = np.ones(1, dtype=complex)
    for d in dims:
        t = np.kron(t, random_ket(d, rng))
    return PureState(tuple(dims), t, normalized=True)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sloccwit.errors import DegenerateOperatorError, ShapeError
from sloccwit.overlap import (
    OptimizerConfig,
    OverlapTable,
    maximize_slocc_overlap,
    overlap_objective,
    overlap_table,
    per_party_update,
)
from sloccwit.states import random_ket, representative
from sloccwit.tensor import LocalOperatorTuple, PureState, kron_all

from conftest import random_complex

FAST = OptimizerConfig(restarts=10, max_sweeps=400)


def _random_pair(rng, dims):
    n = int(np.prod(dims))
    phi = PureState(dims, random_complex(rng, n)).normalize()
    psi = PureState(dims, random_complex(rng, n)).normalize()
    return phi, psi


def _random_ops(rng, dims):
    return LocalOperatorTuple(tuple(random_complex(rng, (d, d)) for d in dims))


def _party_optimum(phi, psi, ops, party):
    """Largest objective over the operator of ``party``, via projection onto the span
    of {(x)ops|psi> with E_ab in slot ``party``}; built from explicit Kronecker products."""
    d = phi.dims[party]
    cols = []
    for a in range(d):
        for b in range(d):
            e = np.zeros((d, d))
            e[a, b] = 1
            mats = list(ops.ops)
            mats[party] = e
            cols.append(kron_all(mats) @ psi.amps)
    u, sv, _ = np.linalg.svd(np.array(cols).T, full_matrices=False)
    q = u[:, sv > 1e-10 * sv[0]]
    return float(np.linalg.norm(q.conj().T @ phi.amps) ** 2)


class TestObjective:
    def test_matches_explicit_formula(self, rng):
        phi, psi = _random_pair(rng, (2, 3, 3))
        ops = _random_ops(rng, (2, 3, 3))
        eta = kron_all(list(ops.ops)) @ psi.amps
        want = abs(np.vdot(phi.amps, eta)) ** 2 / np.vdot(eta, eta).real
        assert overlap_objective(phi, psi, ops) == pytest.approx(want, rel=1e-12)

    @given(seed=st.integers(0, 10_000), scales=st.lists(
        st.complex_numbers(min_magnitude=0.1, max_magnitude=10), min_size=3, max_size=3))
    def test_invariant_under_rescaling(self, seed, scales):
        rng = np.random.default_rng(seed)
        phi, psi = _random_pair(rng, (2, 2, 3))
        ops = _random_ops(rng, (2, 2, 3))
        scaled = LocalOperatorTuple(tuple(c * o for c, o in zip(scales, ops.ops)))
        assert overlap_objective(phi, psi, scaled) == pytest.approx(
            overlap_objective(phi, psi, ops), rel=1e-10)

    @given(seed=st.integers(0, 10_000))
    def test_bounded_by_one(self, seed):
        rng = np.random.default_rng(seed)
        phi, psi = _random_pair(rng, (2, 3))
        v = overlap_objective(phi, psi, _random_ops(rng, (2, 3)))
        assert 0 <= v <= 1 + 1e-12

    def test_annihilating_operators(self):
        psi = representative("ghz:3")
        zero = np.zeros((2, 2))
        with pytest.raises(DegenerateOperatorError):
            overlap_objective(psi, psi, LocalOperatorTuple((zero, np.eye(2), np.eye(2))))
        # projectors that kill every branch of GHZ
        p0, p1 = np.diag([1.0, 0]), np.diag([0, 1.0])
        with pytest.raises(DegenerateOperatorError):
            overlap_objective(psi, psi, LocalOperatorTuple((p0, p1, np.eye(2))))

    def test_dims_mismatch(self):
        with pytest.raises(ShapeError):
            overlap_objective(representative("ghz:3"), representative("psi6"),
                              LocalOperatorTuple.identity((2, 2, 2)))


class TestPartyUpdate:
    @pytest.mark.parametrize("dims", [(2, 2), (2, 3, 3), (3, 2, 2)])
    def test_attains_party_optimum(self, rng, dims):
        phi, psi = _random_pair(rng, dims)
        ops = _random_ops(rng, dims)
        for party in range(len(dims)):
            a = per_party_update(phi, psi, ops, party)
            assert np.linalg.norm(a) == pytest.approx(1.0)
            new = list(ops.ops)
            new[party] = a
            got = overlap_objective(phi, psi, LocalOperatorTuple(tuple(new)))
            assert got == pytest.approx(_party_optimum(phi, psi, ops, party), rel=1e-9)

    def test_rank_deficient_environment(self, rng):
        # a product orbit leaves the party subproblem rank one
        dims = (2, 3, 3)
        phi = PureState(dims, random_ket(18, 1))
        psi = PureState(dims, kron_all([random_ket(d, 10 + d) for d in dims]))
        ops = _random_ops(rng, dims)
        a = per_party_update(phi, psi, ops, 1)
        new = list(ops.ops)
        new[1] = a
        got = overlap_objective(phi, psi, LocalOperatorTuple(tuple(new)))
        assert got == pytest.approx(_party_optimum(phi, psi, ops, 1), rel=1e-9)

    def test_party_out_of_range(self):
        g = representative("ghz:3")
        with pytest.raises(ShapeError):
            per_party_update(g, g, LocalOperatorTuple.identity((2, 2, 2)), 3)


class TestMaximize:
    def test_self_overlap_saturates(self):
        s = representative("psi9")
        res = maximize_slocc_overlap(s, s, FAST)
        assert res.lam == pytest.approx(1.0, abs=1e-12)
        assert res.saturated

    def test_ghz_target_from_w_orbit(self):
        res = maximize_slocc_overlap(representative("ghz:3"), representative("w:3"), FAST)
        assert res.lam == pytest.approx(0.75, abs=1e-8)
        assert not res.saturated

    def test_w_is_in_ghz_orbit_closure(self):
        res = maximize_slocc_overlap(representative("w:3"), representative("ghz:3"), FAST)
        assert res.saturated

    def test_product_target(self):
        prod = PureState((2, 3, 3), kron_all([random_ket(d, d) for d in (2, 3, 3)]))
        res = maximize_slocc_overlap(prod, representative("psi7"), FAST)
        assert res.saturated

    def test_bell_against_product_orbit(self):
        res = maximize_slocc_overlap(representative("bell"), representative("zero:2x2"), FAST)
        assert res.lam == pytest.approx(0.5, abs=1e-10)

    def test_deterministic(self):
        phi, psi = representative("psi6"), representative("psi10")
        cfg = FAST.replace(seed=7)
        a = maximize_slocc_overlap(phi, psi, cfg)
        b = maximize_slocc_overlap(phi, psi, cfg)
        assert a.per_restart_values == b.per_restart_values
        assert a.sweeps_used == b.sweeps_used

    def test_result_shape(self):
        # an interior optimum with well-conditioned operators, so the argmax
        # reproduces the value to rounding
        phi, psi = representative("psi15"), representative("psi17")
        res = maximize_slocc_overlap(phi, psi, FAST)
        assert len(res.per_restart_values) == FAST.restarts
        assert res.lam == max(res.per_restart_values)
        assert res.argmax.dims == (2, 3, 3)
        assert max(np.linalg.cond(o) for o in res.argmax.ops) < 1e3
        v = overlap_objective(phi, psi, res.argmax)
        assert v == pytest.approx(res.lam, rel=1e-12)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OptimizerConfig(restarts=0)
        with pytest.raises(ValueError):
            OptimizerConfig(saturation_threshold=1.0)
        with pytest.raises(ValueError):
            OptimizerConfig(convergence_tol=0)
        with pytest.raises(ValueError):
            OptimizerConfig(long_step=-1)


class TestTable:
    @pytest.fixture(scope="class")
    @staticmethod
    def table():
        return overlap_table(["psi6", "psi7", "psi8"], OptimizerConfig(restarts=8, max_sweeps=300))

    def test_csv_layout(self, table):
        rows = [r.split(",") for r in table.to_csv().strip().splitlines()]
        assert rows[0] == ["orbit\\target", "psi6", "psi7", "psi8"]
        assert [rows[k][k] for k in (1, 2, 3)] == ["self"] * 3
        # psi7 lies in the closure of the psi6 orbit
        assert rows[1][2] == "1*"
        for r in rows[1:]:
            for cell in r[1:]:
                assert cell in ("self", "1*") or len(cell.split(".")[1]) == 6

    def test_json_round_trip(self, table):
        back = OverlapTable.from_json(table.to_json())
        np.testing.assert_array_equal(back.values(), table.values())
        np.testing.assert_array_equal(back.saturated_mask(), table.saturated_mask())
        assert back.config == table.config
        j, i = 1, 0
        np.testing.assert_allclose(back.cells[(j, i)].argmax.ops[0], table.cells[(j, i)].argmax.ops[0])

    def test_csv_round_trip(self, table):
        back = OverlapTable.from_csv(table.to_csv())
        np.testing.assert_array_equal(back.saturated_mask(), table.saturated_mask())
        np.testing.assert_allclose(back.values()[~table.saturated_mask()],
                                   table.values()[~table.saturated_mask()], atol=5e-7)

    def test_parallel_matches_serial(self, table):
        par = overlap_table(["psi6", "psi7", "psi8"], table.config, jobs=2)
        np.testing.assert_array_equal(par.values(), table.values())

    def test_mixed_dimensions(self):
        with pytest.raises(ShapeError):
            overlap_table(["psi6", "ghz:3"])

    def test_malformed_csv(self):
        with pytest.raises(ValueError):
            OverlapTable.from_csv("a,b\n")
        with pytest.raises(ValueError):
            OverlapTable.from_json('{"kind": "other"}')

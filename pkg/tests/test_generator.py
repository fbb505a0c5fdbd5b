import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parsimplex.generator import GenSpec, generate, realized_density
from parsimplex.lp_model import LpProblem, Status, validate
from parsimplex.tableau import solve_serial


def test_same_seed_is_bit_identical():
    a = generate(GenSpec(12, 9, 0.7, 42))
    b = generate(GenSpec(12, 9, 0.7, 42))
    assert a.same_as(b)
    assert not a.same_as(generate(GenSpec(12, 9, 0.7, 43)))


def test_full_density():
    p = generate(GenSpec(4, 4, 1.0, 0))
    assert np.count_nonzero(p.a) == 16
    assert ((p.a > 0) & (p.a < 50)).all()
    assert realized_density(p) == 1.0


def test_realized_density_of_zero_matrix():
    assert realized_density(LpProblem(np.zeros((3, 3)), np.zeros(3), np.zeros(3))) == 0.0


def test_realized_density_large():
    p = generate(GenSpec(256, 256, 0.9, 1))
    assert 0.88 <= realized_density(p) <= 0.92


@pytest.mark.parametrize("seed", range(20))
def test_realized_density_concentrates(seed):
    # m*n >= 1e4
    assert abs(realized_density(generate(GenSpec(100, 120, 0.9, seed))) - 0.9) <= 0.02


def test_costs_only_on_constrained_columns():
    p = generate(GenSpec(3, 40, 0.1, 7))
    empty = ~(p.a != 0).any(axis=0)
    assert empty.any()
    assert (p.c[empty] == 0).all()
    assert (p.c[~empty] > 0).all()


def test_witness_feasibility():
    p = generate(GenSpec(10, 10, 0.5, 3))
    assert (p.b >= 0).all()
    assert p.seed == 3 and p.density == 0.5


@pytest.mark.parametrize("bad", [dict(m=0, n=1), dict(m=1, n=0), dict(density=0.0), dict(density=1.5),
                                 dict(seed=-1)])
def test_invalid_spec(bad):
    args = dict(m=2, n=2, density=0.5, seed=0) | bad
    with pytest.raises(ValueError):
        GenSpec(**args)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.floats(0.05, 1.0), st.integers(0, 2**63))
def test_generated_instances_are_valid_and_solvable(m, n, d, seed):
    p = generate(GenSpec(m, n, d, seed))
    validate(p)
    out = solve_serial(p)
    assert out.status is Status.OPTIMAL
    assert out.check(p)

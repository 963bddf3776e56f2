"""Grid and trajectory primitives: norms, differences, embedding, io."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mpass.errors import EndpointNotZeroError, GridMismatchError
from mpass.trajectory import (
    TimeGrid,
    Trajectory,
    backward_difference,
    central_difference,
    extend_by_zero,
    forward_difference,
    second_difference,
)

from conftest import rough_trajectory, smooth_trajectory


def test_grid_basics():
    g = TimeGrid(2.0, 8)
    assert g.step == 0.5
    assert g.nodes[0] == -2.0
    assert g.nodes[-1] == pytest.approx(1.5)
    assert len(g.nodes) == 8
    # node at +k is node 0, never stored
    assert 2.0 not in g.nodes


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(2.0, 3)
    with pytest.raises(ValueError):
        TimeGrid(-1.0, 8)
    with pytest.raises(ValueError):
        TimeGrid(np.inf, 8)


def test_grid_from_step():
    g = TimeGrid.from_step(5.0, 0.05)
    assert g.node_count == 200
    assert g.step == pytest.approx(0.05, abs=0, rel=1e-15)
    with pytest.raises(GridMismatchError):
        TimeGrid.from_step(1.0, 0.3)


def test_sine_norm_oracle():
    # q(t) = sin(pi t) on k=1: |q'|_l2^2 = pi^2, |q|_l2^2 = 1 in the limit
    g = TimeGrid(1.0, 4096)
    q = Trajectory(g, np.sin(np.pi * g.nodes))
    assert q.sobolev_norm() == pytest.approx(np.sqrt(np.pi**2 + 1.0), abs=1e-4)
    assert q.l2_norm() == pytest.approx(1.0, abs=1e-4)
    assert q.sup_norm() == 1.0  # t = -1/2 is a node for N divisible by 4


def test_constant_norm_exact():
    g = TimeGrid(2.0, 64)
    q = Trajectory(g, np.ones(64))
    assert q.sobolev_norm() == pytest.approx(2.0, rel=1e-15)
    assert q.l2_norm() == pytest.approx(2.0, rel=1e-15)
    assert q.sup_norm() == 1.0


def test_norm_decomposition(rng):
    # sob^2 = l2^2 + l2(forward diff)^2 by construction; pin it anyway
    for k in (1.0, 5.0):
        g = TimeGrid(k, 128)
        for n in (1, 2, 3):
            q = smooth_trajectory(g, n, rng)
            h = g.step
            dq = forward_difference(q.values, h)
            expect = np.sqrt(q.l2_norm() ** 2 + h * np.sum(dq * dq))
            assert q.sobolev_norm() == pytest.approx(expect, rel=1e-12)


def test_norm_homogeneity(rng):
    g = TimeGrid(5.0, 256)
    q = smooth_trajectory(g, 2, rng)
    for c in (-3.5, 0.0, 0.125, 7.0):
        scaled = Trajectory(g, c * q.values)
        assert scaled.sobolev_norm() == pytest.approx(abs(c) * q.sobolev_norm(), rel=1e-12, abs=1e-300)
        assert scaled.l2_norm() == pytest.approx(abs(c) * q.l2_norm(), rel=1e-12, abs=1e-300)
        assert scaled.sup_norm() == pytest.approx(abs(c) * q.sup_norm(), rel=1e-12, abs=1e-300)


def test_zero_norm_iff_zero():
    g = TimeGrid(1.0, 16)
    assert Trajectory(g, np.zeros(16)).sobolev_norm() == 0.0
    v = np.zeros(16)
    v[3] = 1e-8
    assert Trajectory(g, v).sobolev_norm() > 0.0


def test_sup_embedding_inequality(rng):
    # |q|_sup <= sqrt(2) |q|_sob for every sampled loop, k >= 1
    count = 0
    for k in (1.0, 5.0, 20.0):
        g = TimeGrid(k, 96)
        for n in (1, 2, 3):
            for _ in range(40):
                q = rough_trajectory(g, n, rng)
                assert q.sup_norm() <= np.sqrt(2.0) * q.sobolev_norm() + 1e-9
                count += 1
            for _ in range(80):
                q = smooth_trajectory(g, n, rng)
                assert q.sup_norm() <= np.sqrt(2.0) * q.sobolev_norm() + 1e-9
                count += 1
    assert count >= 1000


def test_derivative_oracle():
    g = TimeGrid(1.0, 4096)
    q = Trajectory(g, np.sin(np.pi * g.nodes))
    err = np.abs(q.derivative().values[:, 0] - np.pi * np.cos(np.pi * g.nodes))
    assert err.max() <= 1e-4


def test_second_difference_is_backward_of_forward(rng):
    g = TimeGrid(3.0, 128)
    q = smooth_trajectory(g, 2, rng)
    h = g.step
    composed = backward_difference(forward_difference(q.values, h), h)
    direct = second_difference(q.values, h)
    assert np.abs(composed - direct).max() <= 1e-10 * max(1.0, np.abs(direct).max())


def test_second_derivative_consistent_with_central_pair():
    g = TimeGrid(1.0, 2048)
    q = Trajectory(g, np.sin(np.pi * g.nodes))
    twice = central_difference(central_difference(q.values, g.step), g.step)
    direct = q.second_derivative().values
    # different stencils, both second order on smooth samples
    assert np.abs(twice - direct).max() <= 1e-2
    assert np.abs(direct[:, 0] + np.pi**2 * np.sin(np.pi * g.nodes)).max() <= 1e-2


def test_sample_periodic_wrap(rng):
    g = TimeGrid(2.5, 200)
    q = smooth_trajectory(g, 2, rng)
    ts = np.array([-2.5, -1.0, 0.0, 0.3, 2.49])
    np.testing.assert_allclose(q.sample(ts + 2 * 2.5), q.sample(ts), rtol=0, atol=1e-12)
    # node times reproduce node values exactly
    np.testing.assert_allclose(q.sample(g.nodes[7]), q.values[7], atol=1e-12)


def test_extend_by_zero_cosine():
    g = TimeGrid(1.0, 4096)
    q = Trajectory(g, np.cos(np.pi * g.nodes / 2.0))
    big = extend_by_zero(q, 3.0)
    assert big.grid.half_period == 3.0
    assert big.grid.node_count == 3 * 4096
    assert abs(big.sobolev_norm() - q.sobolev_norm()) <= 2.0 * g.step
    # interior nodes carried over exactly
    offset = 4096
    np.testing.assert_array_equal(big.values[offset : offset + 4096], q.values)
    assert np.all(big.values[:offset] == 0.0)


def test_extend_by_zero_rejects_bad_endpoint():
    g = TimeGrid(1.0, 64)
    q = Trajectory(g, np.cos(np.pi * g.nodes))  # value 1 at t=-1
    with pytest.raises(EndpointNotZeroError):
        extend_by_zero(q, 2.0)


def test_extend_by_zero_rejects_misaligned_target():
    g = TimeGrid(1.0, 64)  # h = 1/32
    q = Trajectory(g, np.zeros(64))
    with pytest.raises(GridMismatchError):
        extend_by_zero(q, 1.7)  # (k-j)/h not integral
    with pytest.raises(GridMismatchError):
        extend_by_zero(q, 0.5)


def test_csv_round_trip(tmp_path, rng):
    g = TimeGrid(2.0, 80)
    q = smooth_trajectory(g, 3, rng)
    path = tmp_path / "q.csv"
    q.to_csv(path)
    back = Trajectory.from_csv(path, 2.0)
    np.testing.assert_array_equal(back.values, q.values)
    assert back.grid == q.grid


def test_json_round_trip(tmp_path, rng):
    g = TimeGrid(1.5, 60)
    q = smooth_trajectory(g, 2, rng)
    path = tmp_path / "q.json"
    q.to_json(path)
    back = Trajectory.from_json(path)
    np.testing.assert_array_equal(back.values, q.values)
    assert back.grid == q.grid


def test_rejects_nonfinite_values():
    g = TimeGrid(1.0, 8)
    v = np.zeros(8)
    v[2] = np.nan
    with pytest.raises(ValueError):
        Trajectory(g, v)


@settings(max_examples=60, deadline=None)
@given(
    scale=st.floats(-8.0, 8.0, allow_nan=False),
    seed=st.integers(0, 2**31 - 1),
    half=st.sampled_from([1.0, 2.0, 5.0]),
)
def test_homogeneity_property(scale, seed, half):
    g = TimeGrid(half, 48)
    q = smooth_trajectory(g, 2, np.random.default_rng(seed))
    scaled = Trajectory(g, scale * q.values)
    assert scaled.sobolev_norm() == pytest.approx(
        abs(scale) * q.sobolev_norm(), rel=1e-11, abs=1e-12
    )


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_embedding_inequality_property(seed):
    g = TimeGrid(1.0, 32)
    q = rough_trajectory(g, 1, np.random.default_rng(seed))
    assert q.sup_norm() <= np.sqrt(2.0) * q.sobolev_norm() + 1e-9

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussnm.errors import DomainError
from gaussnm.noise import (
    OUKernel,
    TabulatedKernel,
    WhiteKernel,
    check_positive_type,
    eval_kernel,
    load_tabulated_csv,
)

pairs = st.tuples(st.floats(0, 50), st.floats(0, 50))


def test_ou_example_value():
    d = eval_kernel(OUKernel(2.0, 1.0, 0.0), 1.0, 0.5)
    np.testing.assert_allclose(d, [[np.exp(-1.0), 0.0], [0.0, 0.0]], rtol=1e-15)


def test_ou_equal_times():
    d = eval_kernel(OUKernel(3.0, 0.4, 2.0), 7.0, 7.0)
    np.testing.assert_allclose(d, 1.5 * np.diag([0.4, 2.0]))


@settings(max_examples=100, deadline=None)
@given(pairs, st.floats(0.01, 10), st.floats(0, 2), st.floats(0, 2))
def test_ou_symmetry_and_stationarity(ts, gamma, dq, dp):
    t, s = ts
    k = OUKernel(gamma, dq, dp)
    np.testing.assert_array_equal(eval_kernel(k, t, s), eval_kernel(k, s, t).T)
    shift = 3.25
    np.testing.assert_allclose(eval_kernel(k, t + shift, s + shift), eval_kernel(k, t, s), rtol=1e-12, atol=1e-300)


def test_ou_validation():
    with pytest.raises(DomainError):
        OUKernel(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        OUKernel(1.0, -1.0, 0.0)


def test_white_rejects_indefinite():
    with pytest.raises(DomainError):
        WhiteKernel([[1.0, 0.0], [0.0, -1.0]])


def test_white_eval_returns_weight():
    k = WhiteKernel([[1.0, 0.2], [0.2, 0.5]])
    np.testing.assert_array_equal(eval_kernel(k, 1.0, 2.0), k.d)


def test_ou_positive_type_on_random_grids():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = rng.integers(1, 9)
        times = np.sort(rng.uniform(0, 50, n))
        k = OUKernel(rng.uniform(0.05, 10), rng.uniform(0, 2), rng.uniform(0, 2))
        assert check_positive_type(k, times)


def test_single_time_positive_type():
    assert check_positive_type(OUKernel(1.0, 1.0, 1.0), [2.0])


def _constant_table(times, block):
    n = len(times)
    blocks = np.broadcast_to(np.asarray(block, dtype=float), (n, n, 2, 2))
    return TabulatedKernel(times, blocks)


def test_tabulated_negative_block_is_not_positive_type():
    k = _constant_table([0.0, 1.0], [[-1.0, 0.0], [0.0, 0.0]])
    assert not check_positive_type(k, [0.5])


def test_tabulated_bilinear_and_symmetric():
    times = np.linspace(0.0, 2.0, 5)
    ou = OUKernel(1.3, 1.0, 0.5)
    ta, tb = np.meshgrid(times, times, indexing="ij")
    k = TabulatedKernel(times, ou(ta, tb))
    np.testing.assert_allclose(k(1.0, 0.5), ou(1.0, 0.5), rtol=1e-14)
    # midpoint of a cell is the mean of its corners
    corners = ou(np.array([0.5, 1.0, 0.5, 1.0]), np.array([0.0, 0.0, 0.5, 0.5])).mean(axis=0)
    np.testing.assert_allclose(k(0.75, 0.25), corners, rtol=1e-14)
    for t, s in [(0.1, 1.9), (1.33, 0.2)]:
        np.testing.assert_array_equal(k(t, s), k(s, t).T)


def test_tabulated_out_of_range():
    k = _constant_table([0.0, 1.0], np.eye(2))
    with pytest.raises(DomainError):
        k(1.5, 0.0)


def test_tabulated_rejects_asymmetric_table():
    blocks = np.zeros((2, 2, 2, 2))
    blocks[0, 1] = [[0.0, 1.0], [0.0, 0.0]]
    with pytest.raises(DomainError):
        TabulatedKernel([0.0, 1.0], blocks)


def test_csv_round_trip(tmp_path):
    times = [0.0, 0.5, 1.5]
    ou = OUKernel(2.0, 1.0, 0.3)
    lines = ["t,s,D11,D12,D21,D22"]
    rows = []
    for t in times:
        for s in times:
            d = ou(t, s)
            rows.append(",".join(repr(float(x)) for x in (t, s, *d.ravel())))
    rows.reverse()  # row order is free
    path = tmp_path / "kernel.csv"
    path.write_text("\n".join(lines + rows) + "\n")
    k = load_tabulated_csv(path)
    np.testing.assert_array_equal(k.times, times)
    np.testing.assert_allclose(k(1.5, 0.0), ou(1.5, 0.0))


def test_csv_missing_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0,1,0,0,1\n")
    with pytest.raises(DomainError):
        load_tabulated_csv(path)


def test_csv_incomplete_grid(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,s,D11,D12,D21,D22\n0,0,1,0,0,1\n0,1,1,0,0,1\n1,1,1,0,0,1\n")
    with pytest.raises(DomainError):
        load_tabulated_csv(path)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfield import lattice


def test_rank_examples():
    assert lattice.rank((0, 0), 3) == 0
    assert lattice.rank((1, 2), 3) == 7  # 1 + 2*3, little-endian


def test_rank_unrank_round_trip_exhaustive():
    q, d = 3, 4
    for i in range(3**4):
        assert lattice.rank(lattice.unrank(i, q, d), q) == i


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.integers(1, 5), st.data())
def test_rank_unrank_round_trip_random(q, d, data):
    i = data.draw(st.integers(0, q**d - 1))
    assert lattice.rank(lattice.unrank(i, q, d), q) == i


def test_unrank_out_of_range():
    with pytest.raises(lattice.RangeError):
        lattice.unrank(8, 2, 3)
    with pytest.raises(lattice.RangeError):
        lattice.unrank(-1, 2, 3)


def test_all_states_matches_unrank():
    states = lattice.all_states(2, 3)
    for i in range(8):
        assert tuple(states[i]) == lattice.unrank(i, 2, 3)


def test_root_table_invariants():
    for q in (2, 3, 5, 8):
        table = lattice.RootTable(q)
        assert np.max(np.abs(np.abs(table.powers) - 1.0)) < 1e-14
        assert abs(table.power(q) - 1.0) < 1e-14
        # geometric sum: sum_j theta^(jk) = q * delta_{k mod q, 0}
        for k in range(2 * q):
            s = np.sum(table.powers ** k)
            expected = q if k % q == 0 else 0.0
            assert abs(s - expected) < 1e-12


def test_dft_of_delta_is_constant():
    f = np.zeros(8)
    f[0] = 1.0
    c = lattice.dft(f, 2, 3)
    assert np.allclose(c, 2 ** (-1.5), atol=1e-14)


def test_dft_inverse_round_trip():
    rng = np.random.default_rng(0)
    f = rng.standard_normal(27) + 1j * rng.standard_normal(27)
    back = lattice.dft(lattice.dft(f, 3, 3), 3, 3, inverse=True)
    assert np.max(np.abs(back - f)) < 1e-12


def test_dft_parseval():
    rng = np.random.default_rng(1)
    f = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    c = lattice.dft(f, 4, 2)
    assert abs(np.sum(np.abs(f) ** 2) - np.sum(np.abs(c) ** 2)) < 1e-12


def test_dft_matches_naive_oracle():
    rng = np.random.default_rng(2)
    f = rng.standard_normal(27) + 1j * rng.standard_normal(27)
    fast = lattice.dft(f, 3, 3)
    slow = lattice.dft_naive(f, 3, 3)
    assert np.max(np.abs(fast - slow)) < 1e-11


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(2, 1), (2, 4), (3, 2), (4, 2), (5, 1), (6, 2)]),
       st.integers(0, 2**31 - 1))
def test_dft_unitarity_property(qd, seed):
    q, d = qd
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(q**d) + 1j * rng.standard_normal(q**d)
    c = lattice.dft(f, q, d)
    assert abs(np.vdot(f, f).real - np.vdot(c, c).real) < 1e-10
    assert np.max(np.abs(lattice.dft(c, q, d, inverse=True) - f)) < 1e-11


def test_dft_all_sizes_up_to_4096():
    rng = np.random.default_rng(3)
    pairs = [(q, d) for q in range(2, 17) for d in range(1, 13)
             if q**d <= 4096]
    pairs += [(101, 1), (512, 1), (4096, 1)]  # large single-axis probes
    for q, d in pairs:
        f = rng.standard_normal(q**d)
        c = lattice.dft(f, q, d)
        assert abs(np.sum(f**2) - np.sum(np.abs(c) ** 2)) < 1e-10 * q**d


def test_dft_shape_error():
    with pytest.raises(lattice.ShapeError):
        lattice.dft(np.zeros(7), 2, 3)


def test_dft_batched_matches_loop():
    rng = np.random.default_rng(4)
    batch = rng.standard_normal((5, 9)) + 1j * rng.standard_normal((5, 9))
    together = lattice.dft(batch, 3, 2)
    for i in range(5):
        assert np.allclose(together[i], lattice.dft(batch[i], 3, 2))


def test_circulant_from_kernel():
    kernel = np.array([0.5, 0.3, 0.2])
    mat = lattice.circulant_from_kernel(kernel, 3, 1)
    # entry [x, y] = kernel[(x - y) mod 3]
    assert np.allclose(mat, [[0.5, 0.2, 0.3], [0.3, 0.5, 0.2], [0.2, 0.3, 0.5]])


def test_axis_tensor_little_endian():
    v0 = np.array([1.0, 2.0])
    v1 = np.array([1.0, 10.0])
    out = lattice.axis_tensor([v0, v1])
    # rank = x0 + 2*x1
    assert np.allclose(out, [1.0, 2.0, 10.0, 20.0])

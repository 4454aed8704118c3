import numpy as np
import pytest

from permreach import _kernels
from permreach.oracle import GeneratorSpec, _encode, random_aban

numba_only = pytest.mark.skipif(_kernels.bfs_reach_numba is None, reason="numba not installed")


@numba_only
@pytest.mark.parametrize("seed", range(40))
def test_bfs_backends_agree(seed):
    net = random_aban(GeneratorSpec(7, 3, 2, 0.8, seed))
    args = [np.asarray(a, dtype=np.int64) for a in _encode(net)]
    for init in (0, 5, 77):
        for bit in range(7):
            for val in (0, 1):
                gm, gv = np.int64(1 << bit), np.int64(val << bit)
                f1, p1, v1 = _kernels.bfs_reach_numba(7, np.int64(init), *args, gm, gv)
                f2, p2, v2 = _kernels.bfs_reach_numpy(7, np.int64(init), *args, gm, gv)
                assert int(f1) == int(f2)
                if f1 >= 0:
                    s = int(f1)
                    while s != init:
                        assert p1[s] == p2[s] and v1[s] == v2[s]
                        s = int(p1[s])


@numba_only
@pytest.mark.parametrize("n,seed", [(1, 0), (3, 4), (10, 11)])
def test_walk_backends_agree(n, seed):
    a = _kernels.walk_steps_numba(n, 500, np.uint64(seed))
    b = _kernels.walk_steps_numpy(n, 500, seed)
    assert np.array_equal(a, b)


def test_walk_reflects_at_zero():
    steps = _kernels.walk_steps_numpy(1, 10, 3)
    assert (steps == 1).all()
    # parity: hitting n from 0 takes a number of steps with the parity of n
    assert (_kernels.walk_steps_numpy(4, 200, 9) % 2 == 0).all()


def test_env_flag_disables_numba(monkeypatch):
    import importlib
    monkeypatch.setenv("PERMREACH_DISABLE_NUMBA", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.USE_NUMBA is False
        found, _, _ = mod.bfs_reach(2, 0, [0], [0], [0], [1], 1, 1)
        assert found == 1
    finally:
        monkeypatch.delenv("PERMREACH_DISABLE_NUMBA")
        importlib.reload(_kernels)

import threading

import pytest

from ratlimits.core.parallel_executor import parallel_map


def test_results_keep_input_order():
    assert parallel_map(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]


def test_single_thread_runs_inline():
    seen = []
    parallel_map(lambda _: seen.append(threading.get_ident()), range(5), threads=1)
    assert set(seen) == {threading.get_ident()}


def test_first_failure_is_raised_after_all_work():
    done = []

    def work(x):
        if x in (3, 7):
            raise ValueError(f"item {x}")
        done.append(x)
        return x

    with pytest.raises(ValueError, match="item 3"):
        parallel_map(work, range(10), threads=3)
    assert sorted(done) == [0, 1, 2, 4, 5, 6, 8, 9]

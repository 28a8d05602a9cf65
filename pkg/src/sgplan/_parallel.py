"""Optional per-state thread parallelism for value-iteration sweeps.

Backups for all states at one level are independent, so they may run on a
thread pool; results are gathered in state order, making the output
bit-identical to sequential execution regardless of thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count_from_env() -> int:
    """Parallelism cap from SG_THREADS; absence means single-threaded."""
    raw = os.environ.get("SG_THREADS")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def state_map(fn, n_states: int, threads: int) -> list:
    if threads <= 1 or n_states <= 1:
        return [fn(s) for s in range(n_states)]
    with ThreadPoolExecutor(max_workers=min(threads, n_states)) as pool:
        return list(pool.map(fn, range(n_states)))

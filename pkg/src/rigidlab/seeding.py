"""Per-replica random streams and an ordered thread-pool map.

Replica ``i`` of an experiment with master seed ``s`` always draws from
Philox keyed by SeedSequence([s, i]), so results do not depend on how
replicas are scheduled across threads.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import RigidLabError

THREADS_ENV = "RIGIDLAB_THREADS"


def replica_seed(master_seed, index):
    """64-bit integer identifying one replica's stream (for reports and error messages)."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def replica_rng(master_seed, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(master_seed), int(index)])))


def thread_count(default=1):
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return default
    return max(1, n)


def replica_map(fn, master_seed, replicas, threads=None):
    """[fn(rng_i, seed_i, i) for i in range(replicas)], evaluated on a thread pool, in order."""
    threads = thread_count() if threads is None else max(1, int(threads))

    def task(i):
        seed = replica_seed(master_seed, i)
        try:
            return fn(replica_rng(master_seed, i), seed, i)
        except RigidLabError as err:
            err.context.setdefault("replica", i)
            err.context.setdefault("seed", seed)
            raise

    if threads == 1 or replicas <= 1:
        return [task(i) for i in range(replicas)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, range(replicas)))

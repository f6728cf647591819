"""Process pools shared across the package.

Pools are created lazily, one per worker count, and reused for the life of
the process: repeated fold/tree loops then pay the spawn cost once. All
tasks sent through these pools are pure functions of their arguments, and
callers key every random draw by stable indices, so scheduling can never
change a result.
"""

from __future__ import annotations

import atexit
from concurrent.futures import ProcessPoolExecutor

_POOLS: dict[int, ProcessPoolExecutor] = {}


def pool(workers: int) -> ProcessPoolExecutor:
    if workers < 2:
        raise ValueError("a pool needs at least two workers; run inline instead")
    if workers not in _POOLS:
        _POOLS[workers] = ProcessPoolExecutor(max_workers=workers)
    return _POOLS[workers]


@atexit.register
def shutdown() -> None:
    for p in _POOLS.values():
        p.shutdown(wait=False, cancel_futures=True)
    _POOLS.clear()

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    try:
        n = int(os.environ.get("WDRO_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def ordered_map(fn, items):
    """Map ``fn`` over ``items`` with up to WDRO_THREADS workers; results keep input order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))

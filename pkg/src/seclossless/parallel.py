"""Process-pool map whose results never depend on the worker count."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

JOBS_ENV = "SECLOSSLESS_JOBS"


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        env = os.environ.get(JOBS_ENV)
        jobs = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(jobs))


def pmap(fn, items, jobs: int | None = None) -> list:
    items = list(items)
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))

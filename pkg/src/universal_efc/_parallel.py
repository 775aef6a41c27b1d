"""Order-preserving task map over worker processes."""
from concurrent.futures import ProcessPoolExecutor


def map_tasks(func, tasks, jobs=1):
    """Apply ``func`` to every task, in order. ``jobs > 1`` uses processes.

    ``func`` must be a module-level function; results are returned in task
    order so aggregation never depends on scheduling.
    """
    tasks = list(tasks)
    jobs = int(jobs or 1)
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))

"""Bounded worker pool for independent pipeline tasks."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Hashable, List, Sequence, Tuple

from tqdm import tqdm

from netdomain.core.config import get_settings

logger = logging.getLogger(__name__)


def _call(fn: Callable, key: Hashable, args: Tuple) -> Tuple[Hashable, Any]:
    try:
        return key, fn(*args)
    except Exception as e:
        logger.error(f"Task {key!r} failed: {e}", exc_info=True)
        raise


class WorkerPool:
    """
    Runs independent tasks on at most `jobs` worker processes.

    Results are returned keyed and ordered like the submitted tasks, so the
    output never depends on completion order. With jobs == 1 everything runs
    in the calling process.
    """

    def __init__(self, jobs: int = 1, desc: str = "tasks"):
        self.jobs = max(1, int(jobs))
        self.desc = desc

    def map(
        self,
        fn: Callable,
        tasks: Sequence[Tuple[Hashable, Tuple]],
        chunksize: int = 1,
    ) -> Dict[Hashable, Any]:
        """
        Apply fn(*args) for every (key, args) task.

        Args:
            fn: picklable module-level function
            tasks: sequence of (key, args) pairs; keys must be unique
            chunksize: tasks handed to a worker at once

        Returns:
            Dict of key -> result, in task order
        """
        keys = [key for key, _ in tasks]
        if len(set(keys)) != len(keys):
            raise ValueError("Task keys must be unique")

        show = get_settings().progress
        results: Dict[Hashable, Any] = {}

        if self.jobs == 1 or len(tasks) <= 1:
            for key, args in tqdm(tasks, desc=self.desc, disable=not show):
                results[key] = _call(fn, key, args)[1]
            return results

        logger.debug(f"Running {len(tasks)} {self.desc} on {self.jobs} workers")
        collected: List[Tuple[Hashable, Any]] = []
        with ProcessPoolExecutor(max_workers=self.jobs) as executor:
            iterator = executor.map(
                _call,
                [fn] * len(tasks),
                keys,
                [args for _, args in tasks],
                chunksize=max(1, chunksize),
            )
            for item in tqdm(iterator, total=len(tasks), desc=self.desc, disable=not show):
                collected.append(item)

        by_key = dict(collected)
        for key in keys:
            results[key] = by_key[key]
        return results


def run_tasks(
    fn: Callable,
    tasks: Sequence[Tuple[Hashable, Tuple]],
    jobs: int = 1,
    desc: str = "tasks",
    chunksize: int = 1,
) -> Dict[Hashable, Any]:
    """Convenience wrapper around WorkerPool.map."""
    return WorkerPool(jobs=jobs, desc=desc).map(fn, tasks, chunksize=chunksize)

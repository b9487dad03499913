"""
Core functionality - constants, enums, exceptions, config, worker pool.
"""
from netdomain.core.constants import *
from netdomain.core.enums import *
from netdomain.core.exceptions import *
from netdomain.core.config import get_settings, Settings, load_pipeline_config
from netdomain.core.workers import WorkerPool, run_tasks

__all__ = [
    "get_settings",
    "Settings",
    "load_pipeline_config",
    "WorkerPool",
    "run_tasks",
]

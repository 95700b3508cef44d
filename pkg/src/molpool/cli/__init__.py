from .commands import (
    DETERMINISTIC_ENV,
    CommandError,
    cmd_benchmark,
    cmd_evaluate,
    cmd_pool_inspect,
    cmd_train,
    speedup_percent,
)
from .config import ConfigError, RunConfig, load_config, parse_config
from .main import main

__all__ = [
    "CommandError",
    "ConfigError",
    "DETERMINISTIC_ENV",
    "RunConfig",
    "cmd_benchmark",
    "cmd_evaluate",
    "cmd_pool_inspect",
    "cmd_train",
    "load_config",
    "main",
    "parse_config",
    "speedup_percent",
]

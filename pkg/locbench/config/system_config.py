"""
Runtime configuration for locbench.
Values come from environment variables (optionally a local .env file).
"""

import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

load_dotenv()


def _env_bool(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


@dataclass
class LoggingConfig:
    """Logging settings."""
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    @classmethod
    def from_env(cls) -> 'LoggingConfig':
        """Create logging config from environment variables."""
        return cls(
            level=os.getenv('LOCBENCH_LOG_LEVEL', cls.level).upper(),
            format=os.getenv('LOCBENCH_LOG_FORMAT', cls.format),
        )


@dataclass
class PathConfig:
    """File path configuration."""
    output_dir: str = "./output"

    @classmethod
    def from_env(cls) -> 'PathConfig':
        """Create path config from environment variables."""
        return cls(
            output_dir=os.getenv('LOCBENCH_OUTPUT_DIR', cls.output_dir),
        )


@dataclass
class BenchConfig:
    """Benchmark execution settings."""
    show_progress: bool = True
    warmup: bool = True

    @classmethod
    def from_env(cls) -> 'BenchConfig':
        """Create bench config from environment variables."""
        return cls(
            show_progress=_env_bool('LOCBENCH_SHOW_PROGRESS', cls.show_progress),
            warmup=_env_bool('LOCBENCH_WARMUP', cls.warmup),
        )


@dataclass
class SystemConfig:
    """Main system configuration container."""
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    paths: PathConfig = field(default_factory=PathConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    @classmethod
    def from_env(cls) -> 'SystemConfig':
        """Create system config from environment variables."""
        return cls(
            logging=LoggingConfig.from_env(),
            paths=PathConfig.from_env(),
            bench=BenchConfig.from_env(),
        )


# Global configuration instance
config = SystemConfig.from_env()

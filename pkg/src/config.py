import os


def _env_flag(name: str, default: bool = False) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in {"1", "true", "yes", "on"}


class BaseConfig:
    DEBUG = False
    TESTING = False
    OTEL_EXPORTER_OTLP_ENDPOINT = os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT")
    OTEL_CONSOLE = _env_flag("OTEL_CONSOLE")
    DEFAULT_THREADS = int(os.getenv("LAB_THREADS", "1"))
    MLFLOW_EXPERIMENT = os.getenv("LAB_MLFLOW_EXPERIMENT", "spce-fit")
    # Part of the reproducibility contract: trial streams are cut into chunks
    # of this size before being handed to workers.
    TRIAL_CHUNK = 65536


class DevConfig(BaseConfig):
    DEBUG = True


class ProdConfig(BaseConfig):
    pass


class TestConfig(BaseConfig):
    TESTING = True
    OTEL_EXPORTER_OTLP_ENDPOINT = None
    OTEL_CONSOLE = False


def select_config():
    env = os.getenv("LAB_ENV", "dev").lower()
    if env.startswith("prod"):
        return ProdConfig
    if env.startswith("test"):
        return TestConfig
    return DevConfig

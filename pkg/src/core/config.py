import os
from pydantic import BaseModel, Field
from dotenv import load_dotenv

load_dotenv()


def _env_flag(name: str, default: bool = False) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in {"1", "true", "yes", "on"}


class Settings(BaseModel):
    """Process-wide runtime settings read from the environment."""

    workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    debug: bool = False

    @classmethod
    def from_env(cls) -> "Settings":
        workers = os.getenv("LAYERBENCH_WORKERS", "1")
        # "-1" follows the joblib convention of one worker per core
        if workers.strip() == "-1":
            workers = str(os.cpu_count() or 1)
        return cls(
            workers=int(workers),
            log_level=os.getenv("LAYERBENCH_LOG_LEVEL", "INFO").upper(),
            debug=_env_flag("LAYERBENCH_DEBUG"),
        )


settings = Settings.from_env()

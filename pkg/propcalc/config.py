import logging
import os
from dataclasses import dataclass, replace

DEFAULT_BOUND = 4
DEFAULT_MAX_TUPLES = 20000  # per check, above this the tuples are sampled

log = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        log.warning("%s=%r is not an integer, using %d", name, raw, default)
        return default


@dataclass(frozen=True)
class Settings:
    bound: int = DEFAULT_BOUND
    threads: int = 1
    max_tuples: int = DEFAULT_MAX_TUPLES
    seed: int = 0
    include_empty_units: bool = True

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            threads=max(1, _env_int("PROPCALC_THREADS", 1)),
            max_tuples=max(1, _env_int("PROPCALC_MAX_TUPLES", DEFAULT_MAX_TUPLES)),
            seed=_env_int("PROPCALC_SEED", 0),
        )

    def with_overrides(self, **changes) -> "Settings":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

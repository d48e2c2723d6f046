"""Experiment manifests stored as JSON."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ParameterError
from .evaluate import DEFAULT_CONF, DEFAULT_SLACK, DEFAULT_SUITE
from .model import MAX_SEED, interference_from_descriptor

OUTPUT_DIR_ENV = "MPDETECT_OUTPUT_DIR"
FAMILIES = ("np", "rdt", "oracle", "always_zero", "always_one")


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, "results")


@dataclass(frozen=True)
class ExperimentConfig:
    gamma: float = 0.05
    tau: float = 0.2
    n_list: tuple[int, ...] = (4, 16, 64)
    q_grid: tuple[float, ...] = (0.0, 0.1, 0.2, 0.3)
    stress_suite: tuple[str, ...] = DEFAULT_SUITE
    trials: int = 100_000
    seed: int = 20190701
    conf: float = DEFAULT_CONF
    slack: float = DEFAULT_SLACK
    families: tuple[str, ...] = ("np", "rdt")
    output_dir: str = field(default_factory=default_output_dir)

    def __post_init__(self) -> None:
        if not 0 < self.gamma < 1:
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0 <= self.tau < 1:
            raise ParameterError(f"tau must lie in [0, 1), got {self.tau}")
        if not self.n_list or any(not isinstance(n, int) or isinstance(n, bool) or n < 1 for n in self.n_list):
            raise ParameterError(f"n_list must be a nonempty list of positive integers, got {self.n_list}")
        if not self.q_grid or any(not 0 <= q < 0.5 for q in self.q_grid):
            raise ParameterError(f"q_grid must be a nonempty list in [0, 1/2), got {self.q_grid}")
        if list(self.q_grid) != sorted(set(self.q_grid)):
            raise ParameterError("q_grid must be strictly ascending")
        if self.tau >= 1 - max(self.q_grid):
            raise ParameterError(f"tau={self.tau} must stay below 1 - max(q_grid) for the signal to remain detectable")
        if not self.stress_suite:
            raise ParameterError("stress_suite must be nonempty")
        for d in self.stress_suite:
            interference_from_descriptor(d, 0.0)
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {self.trials}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MAX_SEED:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not 0 < self.conf < 1:
            raise ParameterError(f"conf must lie in (0, 1), got {self.conf}")
        if self.slack < 0:
            raise ParameterError(f"slack must be >= 0, got {self.slack}")
        unknown = set(self.families) - set(FAMILIES)
        if not self.families or unknown:
            raise ParameterError(f"families must be drawn from {FAMILIES}, got {self.families}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ParameterError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(raw) - known
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        kwargs = dict(raw)
        for key in ("n_list", "q_grid", "stress_suite", "families"):
            if key in kwargs:
                if not isinstance(kwargs[key], list):
                    raise ParameterError(f"{key} must be a list")
                kwargs[key] = tuple(kwargs[key])
        if "q_grid" in kwargs:
            kwargs["q_grid"] = tuple(float(q) for q in kwargs["q_grid"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("n_list", "q_grid", "stress_suite", "families"):
            out[key] = list(out[key])
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from None
    return ExperimentConfig.from_dict(raw)

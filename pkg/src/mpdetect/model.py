"""Observation model ``Y_k = eps + Delta_k + X_k`` with bounded interference.

Randomness comes from counter-based Philox streams. Each block of
``BLOCK_SIZE`` trials and each purpose (noise, interference, auxiliary
uniforms) gets its own substream keyed by ``(seed, purpose, block)``, so a
row depends only on the seed and its trial index. Blocks can therefore be
generated in any order, or concurrently, with identical results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .errors import ParameterError

BLOCK_SIZE = 8192
MAX_SEED = 2**64 - 1

NOISE_STREAM = 0
INTERFERENCE_STREAM = 1
AUX_STREAM = 2


def _check_q(q: float) -> None:
    if not (0.0 <= q < 0.5):
        raise ParameterError(f"interference bound q must lie in [0, 1/2), got {q}")


@dataclass(frozen=True)
class NoInterference:
    q: float = 0.0

    def __post_init__(self) -> None:
        _check_q(self.q)

    @property
    def id(self) -> str:
        return "none"

    def sample(self, rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
        return np.zeros(shape)


@dataclass(frozen=True)
class Constant:
    c: float
    q: float

    def __post_init__(self) -> None:
        _check_q(self.q)
        if abs(self.c) > self.q:
            raise ParameterError(f"constant interference |c|={abs(self.c)} exceeds q={self.q}")

    @property
    def id(self) -> str:
        if self.c == self.q:
            return "constant+"
        if self.c == -self.q:
            return "constant-"
        return f"constant:{self.c:.12g}"

    def sample(self, rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
        return np.full(shape, float(self.c))


@dataclass(frozen=True)
class Uniform:
    q: float

    def __post_init__(self) -> None:
        _check_q(self.q)

    @property
    def id(self) -> str:
        return "uniform"

    def sample(self, rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
        return rng.uniform(-self.q, self.q, size=shape)


@dataclass(frozen=True)
class Rademacher:
    q: float

    def __post_init__(self) -> None:
        _check_q(self.q)

    @property
    def id(self) -> str:
        return "rademacher"

    def sample(self, rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
        signs = rng.integers(0, 2, size=shape) * 2 - 1
        return self.q * signs.astype(float)


@dataclass(frozen=True)
class ClippedGaussian:
    q: float
    s: float = 1.0

    def __post_init__(self) -> None:
        _check_q(self.q)
        if not self.s > 0:
            raise ParameterError(f"clipped gaussian scale must be positive, got {self.s}")

    @property
    def id(self) -> str:
        return f"clipped_gaussian:{self.s:.12g}"

    def sample(self, rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
        return np.clip(self.s * rng.standard_normal(shape), -self.q, self.q)


InterferenceModel = Union[NoInterference, Constant, Uniform, Rademacher, ClippedGaussian]


def worst_case_interference(q: float) -> Constant:
    """Constant shift ``+q``: the false-alarm maximizing law for any statistic
    that is nondecreasing in the sample-mean shift."""
    _check_q(q)
    return Constant(c=q, q=q)


def interference_from_descriptor(descriptor: str, q: float) -> InterferenceModel:
    """Instantiate a stress-suite entry such as ``"uniform"`` or
    ``"clipped_gaussian:0.5"`` at bound ``q``."""
    name, _, arg = descriptor.partition(":")
    name = name.strip().lower()
    if name == "none":
        return NoInterference()
    if name == "constant+":
        return Constant(c=q, q=q)
    if name == "constant-":
        return Constant(c=-q, q=q)
    if name == "uniform":
        return Uniform(q)
    if name == "rademacher":
        return Rademacher(q)
    if name == "clipped_gaussian":
        try:
            s = float(arg) if arg else 1.0
        except ValueError:
            raise ParameterError(f"bad clipped_gaussian scale in {descriptor!r}") from None
        return ClippedGaussian(q, s)
    raise ParameterError(f"unknown interference descriptor {descriptor!r}")


@dataclass(frozen=True)
class SignalScenario:
    n: int
    epsilon: int
    interference: InterferenceModel = NoInterference()

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ParameterError(f"sample count n must be a positive integer, got {self.n}")
        if self.epsilon not in (0, 1):
            raise ParameterError(f"epsilon must be 0 or 1, got {self.epsilon}")

    @property
    def q(self) -> float:
        return self.interference.q


@dataclass(frozen=True, eq=False)
class ObservationBatch:
    trials: int
    n: int
    data: np.ndarray
    seed: int


def _check_seed(seed: int) -> None:
    if not (0 <= int(seed) <= MAX_SEED):
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")


def substream(seed: int, stream: int, block: int) -> np.random.Generator:
    _check_seed(seed)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


def _block_bounds(trials: int) -> Iterator[tuple[int, int, int]]:
    for block, start in enumerate(range(0, trials, BLOCK_SIZE)):
        yield block, start, min(start + BLOCK_SIZE, trials)


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")


def _noise_block(scenario: SignalScenario, seed: int, block: int, rows: int) -> np.ndarray:
    return substream(seed, NOISE_STREAM, block).standard_normal((rows, scenario.n))


def _interference_block(scenario: SignalScenario, seed: int, block: int, rows: int) -> np.ndarray:
    rng = substream(seed, INTERFERENCE_STREAM, block)
    return scenario.interference.sample(rng, (rows, scenario.n))


def _data_block(scenario: SignalScenario, seed: int, block: int, rows: int) -> np.ndarray:
    delta = _interference_block(scenario, seed, block, rows)
    noise = _noise_block(scenario, seed, block, rows)
    return scenario.epsilon + delta + noise


def iter_blocks(
    scenario: SignalScenario, trials: int, seed: int
) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield ``(start_row, data, aux_uniform)`` block by block."""
    _check_trials(trials)
    _check_seed(seed)
    for block, start, stop in _block_bounds(trials):
        rows = stop - start
        aux = substream(seed, AUX_STREAM, block).random(rows)
        yield start, _data_block(scenario, seed, block, rows), aux


def generate(
    scenario: SignalScenario, trials: int, seed: int, workers: int = 1
) -> ObservationBatch:
    """Draw ``trials`` independent observation vectors of length ``scenario.n``."""
    _check_trials(trials)
    _check_seed(seed)
    jobs = list(_block_bounds(trials))

    def run(job: tuple[int, int, int]) -> np.ndarray:
        block, start, stop = job
        return _data_block(scenario, seed, block, stop - start)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    return ObservationBatch(trials=trials, n=scenario.n, data=np.concatenate(parts), seed=int(seed))


def interference_matrix(scenario: SignalScenario, trials: int, seed: int) -> np.ndarray:
    """The Delta component of :func:`generate` for the same arguments."""
    _check_trials(trials)
    return np.concatenate(
        [_interference_block(scenario, seed, b, stop - start) for b, start, stop in _block_bounds(trials)]
    )


def noise_matrix(scenario: SignalScenario, trials: int, seed: int) -> np.ndarray:
    """The X component of :func:`generate` for the same arguments."""
    _check_trials(trials)
    return np.concatenate(
        [_noise_block(scenario, seed, b, stop - start) for b, start, stop in _block_bounds(trials)]
    )

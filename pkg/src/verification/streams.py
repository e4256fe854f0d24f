"""
Counter-based random streams for the Monte Carlo estimators.

Trials are cut into fixed-size blocks and block ``b`` of stream ``s`` always draws
from ``Philox(key=(seed, s << 48 | b))``. The draws therefore depend only on the
seed and the trial count, never on how many workers share the blocks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from src import config
from src.model.errors import DomainError

STREAM_CONNECTION = 1
STREAM_CAPTURE = 2
STREAM_ORACLE = 3
STREAM_LINK = 4
STREAM_VERIFY = 5

_MASK64 = (1 << 64) - 1
_MAX_BLOCKS = 1 << 48


@dataclass(frozen=True)
class BernoulliEstimate:
    """Fraction of successful trials with its binomial standard error."""
    estimate: float
    stderr: float
    successes: int
    trials: int
    seed: int

    @classmethod
    def from_counts(cls, successes: int, trials: int, seed: int) -> "BernoulliEstimate":
        p = successes / trials
        return cls(estimate=p, stderr=math.sqrt(p * (1.0 - p) / trials),
                   successes=successes, trials=trials, seed=seed)

    def sigma_for(self, reference: float) -> float:
        """Binomial standard error of the mean if ``reference`` were the true probability."""
        return math.sqrt(max(reference * (1.0 - reference), 0.0) / self.trials)

    def within(self, reference: float, sigmas: float = 3.0) -> bool:
        """True if the estimate lies within ``sigmas`` standard errors of ``reference``."""
        sigma = self.sigma_for(reference)
        if sigma == 0.0:
            return self.estimate == reference
        return abs(self.estimate - reference) <= sigmas * sigma

    def as_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr, "trials": self.trials, "seed": self.seed}


def check_seed(seed: int) -> int:
    if not 0 <= seed <= _MASK64:
        raise DomainError(f"Seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    """Independent generator for one block of one stream."""
    if not 0 <= block < _MAX_BLOCKS:
        raise DomainError(f"Block index {block} out of range")
    key = np.array([check_seed(seed) & _MASK64, (stream << 48) | block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def split_blocks(trials: int, block_size: Optional[int] = None) -> List[Tuple[int, int]]:
    """(block index, trials in block) pairs covering ``trials``; only the last block is short."""
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    size = block_size or config.MC_BLOCK_TRIALS
    full, rest = divmod(trials, size)
    blocks = [(b, size) for b in range(full)]
    if rest:
        blocks.append((full, rest))
    return blocks


def count_successes(
        trials: int,
        seed: int,
        stream: int,
        block_successes: Callable[[np.random.Generator, int], int],
        threads: int = 1,
) -> int:
    """
    Run ``block_successes(rng, size)`` over every block and add up the counts.

    :param trials: Total number of trials.
    :param seed: Master seed.
    :param stream: Stream id separating unrelated estimators under one seed.
    :param block_successes: Counts successes among ``size`` trials drawn from ``rng``.
    :param threads: Worker threads; does not affect the result.
    :return: Total number of successes.
    """
    blocks = split_blocks(trials)

    def run(block: Tuple[int, int]) -> int:
        index, size = block
        return int(block_successes(block_generator(seed, stream, index), size))

    if threads <= 1 or len(blocks) == 1:
        return sum(run(block) for block in blocks)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return sum(executor.map(run, blocks))

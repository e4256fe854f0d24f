"""
Independent check of the RT/CT/HT closed forms by enumerating decoding events.

The decoding window of message k spans periods k-3..k+3. It holds one uncoded
group for message k (all m copies lost with probability o^m) and, for each of the
n coded messages, one recovery lane. A lane has a backward and a forward chain;
link d of a chain is a coded group (all r copies lost with probability o^r)
relating the messages at distances d-1 and d, and node d is the uncoded group of
the message at distance d. Lanes share nothing but the group of message k.

A window is stored as boolean success arrays:
    center   shape (N,)
    uncoded  shape (N, n, 2, 3)   [lane, side, depth-1]
    coded    shape (N, n, 2, 3)
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from src import config
from src.logger.logger import MyLogger
from src.model.errors import DomainError, EnumerationBoundError
from src.verification.streams import STREAM_ORACLE, BernoulliEstimate, count_successes

logger = MyLogger(config.LOG_NAME)

CHAIN_DEPTH = 3
SIDES = 2
BITS_PER_LANE = SIDES * CHAIN_DEPTH * 2

Decoder = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EventWindow:
    """One realisation of the decoding window (True = group received)."""
    center: bool
    uncoded: np.ndarray
    coded: np.ndarray

    def __post_init__(self):
        uncoded = np.asarray(self.uncoded, dtype=bool)
        coded = np.asarray(self.coded, dtype=bool)
        if uncoded.ndim != 3 or uncoded.shape[1:] != (SIDES, CHAIN_DEPTH) or coded.shape != uncoded.shape:
            raise DomainError(
                f"Window groups must have shape (n, {SIDES}, {CHAIN_DEPTH}), "
                f"got uncoded {uncoded.shape} and coded {coded.shape}"
            )
        object.__setattr__(self, "uncoded", uncoded)
        object.__setattr__(self, "coded", coded)

    @property
    def n(self) -> int:
        return self.uncoded.shape[0]

    @property
    def n_groups(self) -> int:
        return 1 + self.uncoded.size + self.coded.size

    @classmethod
    def uniform(cls, n: int, received: bool) -> "EventWindow":
        shape = (n, SIDES, CHAIN_DEPTH)
        return cls(center=received, uncoded=np.full(shape, received), coded=np.full(shape, received))


# --- Decoders ---

def chain_decode_batch(center: np.ndarray, uncoded: np.ndarray, coded: np.ndarray) -> np.ndarray:
    """
    Message k is recovered when its own group arrives or some chain reaches a
    delivered neighbour: C1 and (U1 or (C2 and (U2 or (C3 and U3)))).
    """
    u1, u2, u3 = uncoded[..., 0], uncoded[..., 1], uncoded[..., 2]
    c1, c2, c3 = coded[..., 0], coded[..., 1], coded[..., 2]
    chains = c1 & (u1 | (c2 & (u2 | (c3 & u3))))
    return center | chains.reshape(chains.shape[0], -1).any(axis=1)


def peeling_decode_batch(center: np.ndarray, uncoded: np.ndarray, coded: np.ndarray) -> np.ndarray:
    """
    Iterative XOR peeling: a received coded group whose two messages include exactly
    one known message reveals the other. Runs until nothing new is learnt.
    """
    known_center = center.copy()
    known = uncoded.copy()
    while True:
        before_center = known_center.copy()
        before = known.copy()
        center_view = np.broadcast_to(known_center[:, None, None], known.shape[:-1])
        inner = np.concatenate([center_view[..., None], known[..., :-1]], axis=-1)
        outward = coded & inner & ~known
        known |= outward
        # links whose outer message is known reveal the inner one
        inward = coded & known
        known[..., :-1] |= inward[..., 1:]
        known_center |= inward[..., 0].reshape(inward.shape[0], -1).any(axis=1)
        if np.array_equal(before, known) and np.array_equal(before_center, known_center):
            return known_center


def chain_decode(window: EventWindow) -> bool:
    """True iff message k is recovered from the window."""
    return bool(chain_decode_batch(
        np.array([window.center]), window.uncoded[None, ...], window.coded[None, ...]
    )[0])


def peeling_decode(window: EventWindow) -> bool:
    return bool(peeling_decode_batch(
        np.array([window.center]), window.uncoded[None, ...], window.coded[None, ...]
    )[0])


# --- Enumeration ---

def _check_link_outage(o: float) -> None:
    if not 0.0 <= o <= 1.0:
        raise DomainError(f"Link outage must lie in [0, 1], got {o}")


def _unpack(patterns: np.ndarray, n_bits: int) -> np.ndarray:
    """(N,) integer patterns -> (N, n_bits) booleans, bit 0 first."""
    return ((patterns[:, None] >> np.arange(n_bits, dtype=np.int64)) & 1).astype(bool)


def _pattern_probabilities(bits: np.ndarray, success_probs: np.ndarray) -> np.ndarray:
    return np.prod(np.where(bits, success_probs, 1.0 - success_probs), axis=1)


def _lane_success_probs(o: float, m: int, r: int) -> np.ndarray:
    """Per-bit success probabilities of one lane: 6 uncoded bits then 6 coded bits."""
    half = SIDES * CHAIN_DEPTH
    return np.concatenate([np.full(half, 1.0 - o ** m), np.full(half, 1.0 - o ** r)])


def _lane_failure_prob(o: float, m: int, r: int, decoder: Decoder) -> float:
    """Probability that one lane does not recover message k when its own group is lost."""
    half = SIDES * CHAIN_DEPTH
    bits = _unpack(np.arange(1 << BITS_PER_LANE, dtype=np.int64), BITS_PER_LANE)
    weights = _pattern_probabilities(bits, _lane_success_probs(o, m, r))
    uncoded = bits[:, :half].reshape(-1, 1, SIDES, CHAIN_DEPTH)
    coded = bits[:, half:].reshape(-1, 1, SIDES, CHAIN_DEPTH)
    lost = ~decoder(np.zeros(bits.shape[0], dtype=bool), uncoded, coded)
    return float(np.sum(weights[lost]))


def _lane_enumeration(o: float, m: int, n: int, r: int, decoder: Decoder) -> float:
    _check_link_outage(o)
    if n > config.EXACT_ENUMERATION_MAX_CODED:
        raise EnumerationBoundError(
            f"Exact enumeration supports n <= {config.EXACT_ENUMERATION_MAX_CODED}, got n={n}; "
            f"use the Monte Carlo oracle instead"
        )
    if n == 0:
        return o ** m
    return o ** m * _lane_failure_prob(o, m, r, decoder) ** n


def oracle_outage_exact(o: float, m: int, n: int, r: int) -> float:
    """
    Exact outage from the chain decoder: every pattern of one lane is enumerated and
    weighted by its probability, then lanes are combined through their independence.

    :raises EnumerationBoundError: If n exceeds the configured enumeration bound.
    """
    return _lane_enumeration(o, m, n, r, chain_decode_batch)


def oracle_outage_peeling(o: float, m: int, n: int, r: int) -> float:
    """Exact outage of the full peeling decoder over the same window."""
    return _lane_enumeration(o, m, n, r, peeling_decode_batch)


def _joint_chunk(o: float, m: int, n: int, r: int, start: int, stop: int) -> float:
    n_bits = 1 + BITS_PER_LANE * n
    half = SIDES * CHAIN_DEPTH
    bits = _unpack(np.arange(start, stop, dtype=np.int64), n_bits)
    lane_probs = np.tile(_lane_success_probs(o, m, r), n)
    weights = _pattern_probabilities(bits, np.concatenate([[1.0 - o ** m], lane_probs]))
    lanes = bits[:, 1:].reshape(-1, n, 2, half)
    uncoded = lanes[:, :, 0, :].reshape(-1, n, SIDES, CHAIN_DEPTH)
    coded = lanes[:, :, 1, :].reshape(-1, n, SIDES, CHAIN_DEPTH)
    lost = ~chain_decode_batch(bits[:, 0], uncoded, coded)
    return float(np.sum(weights[lost]))


def oracle_outage_joint(o: float, m: int, n: int, r: int, threads: int = 1,
                        chunk_bits: int = 16) -> float:
    """
    Brute-force outage over every joint pattern of the 1 + 12n group outcomes,
    without relying on lane independence. Chunks are summed in index order.

    :raises EnumerationBoundError: If 1 + 12n exceeds the configured bit bound.
    """
    _check_link_outage(o)
    n_bits = 1 + BITS_PER_LANE * n
    if n_bits > config.JOINT_ENUMERATION_MAX_BITS:
        raise EnumerationBoundError(
            f"Joint enumeration of {n_bits} group outcomes exceeds the bound of "
            f"{config.JOINT_ENUMERATION_MAX_BITS}"
        )
    if n == 0:
        return o ** m

    total = 1 << n_bits
    step = 1 << min(chunk_bits, n_bits)
    ranges = [(start, min(start + step, total)) for start in range(0, total, step)]

    ACTION = f"Joint enumeration of {total} patterns (o={o}, m={m}, n={n}, r={r})"
    logger.start(ACTION)
    try:
        if threads <= 1:
            parts = [_joint_chunk(o, m, n, r, a, b) for a, b in ranges]
        else:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                parts = list(executor.map(lambda rng: _joint_chunk(o, m, n, r, *rng), ranges))
        return float(sum(parts))
    finally:
        logger.close(ACTION)


# --- Monte Carlo ---

def _sample_windows(rng: np.random.Generator, size: int, o: float, m: int, n: int, r: int
                    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    shape = (size, n, SIDES, CHAIN_DEPTH)
    center = rng.random(size) < 1.0 - o ** m
    uncoded = rng.random(shape) < 1.0 - o ** m
    coded = rng.random(shape) < 1.0 - o ** r
    return center, uncoded, coded


def oracle_outage_mc(o: float, m: int, n: int, r: int, trials: int, seed: int,
                     threads: int = 1) -> BernoulliEstimate:
    """
    Monte Carlo outage over random windows decoded by the chain decoder.

    :param trials: Number of windows, at least the configured minimum.
    :param seed: Master seed of the oracle stream.
    :param threads: Worker threads; the estimate does not depend on it.
    :return: Estimated outage with its binomial standard error.
    :raises DomainError: If trials is below the minimum or o is outside [0, 1].
    """
    _check_link_outage(o)
    if trials < config.MIN_ORACLE_MC_TRIALS:
        raise DomainError(f"Monte Carlo oracle needs at least {config.MIN_ORACLE_MC_TRIALS} trials, got {trials}")

    def lost_in_block(rng: np.random.Generator, size: int) -> int:
        center, uncoded, coded = _sample_windows(rng, size, o, m, n, r)
        return int(np.count_nonzero(~chain_decode_batch(center, uncoded, coded)))

    losses = count_successes(trials, seed, STREAM_ORACLE, lost_in_block, threads)
    return BernoulliEstimate.from_counts(losses, trials, seed)

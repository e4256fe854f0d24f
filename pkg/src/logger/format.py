import time
from typing import List, Optional, Sequence, Tuple, TypeVar

T = TypeVar("T")


def format_duration(seconds: float, decimals: int = 2) -> str:
    """
    Formats a duration in seconds into a human-readable string.

    Durations of a minute or more drop their fractional part; shorter ones are
    rounded to ``decimals`` places.

    :param seconds: Duration in seconds.
    :param decimals: Number of decimal places for durations under a minute.
    :return: Formatted duration string.
    """
    if seconds >= 60:
        seconds = int(seconds)
    elif seconds % 1 != 0:
        seconds = round(seconds, decimals)

    days, seconds = divmod(seconds, 86_400)
    hours, seconds = divmod(seconds, 3_600)
    minutes, seconds = divmod(seconds, 60)

    if days > 0:
        return f"{days}:{hours:02}:{minutes:02}:{seconds:02} days"
    elif hours > 0:
        return f"{hours}:{minutes:02}:{seconds:02} hours"
    elif minutes > 0:
        return f"{minutes}:{seconds:02} minutes"
    return f"{seconds} second" + ("s" if seconds != 1 else "")


def format_probability(value: float) -> str:
    """Short scientific rendering for log lines, e.g. ``1.000e-03``."""
    return f"{value:.3e}"


class ETAEstimator:
    """Progress label that appends an ETA extrapolated from the elapsed time."""

    def __init__(self, index: int, total: int, born_at: float, count_str: str):
        self.index = index
        self.total = total
        self.born_at = born_at
        self.count_str = count_str

    def estimate_eta(self) -> Optional[float]:
        if self.index == 0:
            return None
        elapsed = time.time() - self.born_at
        return elapsed / self.index * (self.total - self.index)

    def __repr__(self):
        eta = self.estimate_eta()
        if eta is None:
            return f'{self.count_str} (Unknown eta)'
        return f'{self.count_str} (eta {format_duration(eta)})'


def iterate_with_count(elements: Sequence[T], eta: bool = False) -> List[Tuple[object, T]]:
    """
    Pairs every element with a "3 / 12" progress label for log lines.

    :param elements: Elements to iterate over.
    :param eta: Wrap labels in an ETAEstimator.
    :return: List of (label, element) tuples.
    """
    total = len(elements)
    width = len(str(total))
    labels = [f"{num:<{width}} / {total}" for num in range(1, total + 1)]

    result: List[Tuple[object, T]] = list(zip(labels, elements))
    if eta:
        start_time = time.time()
        result = [(ETAEstimator(i, total, start_time, label), element)
                  for i, (label, element) in enumerate(result)]
    return result

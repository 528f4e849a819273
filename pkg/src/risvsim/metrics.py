"""Post-processing of sample logs: ECDF, outage, NLOS share and gain area."""
from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .channel import NLOS
from .errors import EmptyInput, TimestampMismatch
from .sim import PathLossSample, SampleLog


@dataclass(frozen=True)
class Ecdf:
    values: tuple[float, ...]
    fractions: tuple[float, ...]

    def __call__(self, v: float) -> float:
        i = bisect.bisect_right(self.values, v)
        return 0.0 if i == 0 else self.fractions[i - 1]


def ecdf(values: Iterable[float]) -> Ecdf:
    vals = sorted(values)
    if not vals:
        raise EmptyInput("ecdf of empty input")
    n = len(vals)
    counts = Counter(vals)
    xs = sorted(counts)
    fr = []
    acc = 0
    for x in xs:
        acc += counts[x]
        fr.append(acc / n)
    return Ecdf(tuple(xs), tuple(fr))


def _samples(log) -> Sequence[PathLossSample]:
    samples = log.samples if isinstance(log, SampleLog) else list(log)
    if not samples:
        raise EmptyInput("empty sample log")
    return samples


def outage_fraction(log, budget: float = 142.0) -> float:
    samples = _samples(log)
    return sum(s.path_loss_db > budget for s in samples) / len(samples)


def nlos_fraction(log) -> float:
    samples = _samples(log)
    return sum(s.condition == NLOS for s in samples) / len(samples)


def gain_area(baseline: SampleLog, enhanced: SampleLog) -> float:
    """Time integral of the clamped path-loss reduction, in dB*s.

    Each link's samples are held constant until the next timestamp (left
    Riemann sum), so the last sample of a link carries no width.
    """
    if len(baseline.samples) != len(enhanced.samples):
        raise TimestampMismatch("logs differ in length")
    for a, b in zip(baseline.samples, enhanced.samples):
        if a.link_id != b.link_id or abs(a.t - b.t) > 1e-9:
            raise TimestampMismatch(f"sample mismatch: ({a.link_id}, {a.t}) vs ({b.link_id}, {b.t})")
    total = 0.0
    for link in baseline.link_ids():
        base = baseline.for_link(link)
        enh = enhanced.for_link(link)
        for i in range(len(base) - 1):
            width = base[i + 1].t - base[i].t
            if width <= 0:
                raise TimestampMismatch(f"non-increasing timestamps on link {link}")
            total += max(0.0, base[i].path_loss_db - enh[i].path_loss_db) * width
    return total


@dataclass(frozen=True)
class LinkSummary:
    link_id: str
    samples: int
    outage_fraction: float
    nlos_fraction: float
    min_db: float
    max_db: float
    mean_db: float


def summarize(log: SampleLog, budget: float = 142.0) -> list[LinkSummary]:
    out = []
    for link in log.link_ids():
        s = log.for_link(link)
        pl = [x.path_loss_db for x in s]
        out.append(LinkSummary(link, len(s), outage_fraction(s, budget), nlos_fraction(s),
                               min(pl), max(pl), sum(pl) / len(pl)))
    return out

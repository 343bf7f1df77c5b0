"""Reproducible random-number streams.

A stream is addressed by (master seed, text labels, replicate index) and is a
pure function of that address: the same address yields the same generator on
any platform and under any worker count. Labels are hashed with sha256, not
the process-salted builtin hash.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_words(label: str) -> tuple[int, int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return (
        int.from_bytes(digest[:8], "little"),
        int.from_bytes(digest[8:16], "little"),
    )


@dataclass(frozen=True)
class RngStream:
    """Address of a reproducible generator.

    ``seed`` is the 64-bit master seed, ``index`` the replicate number.
    ``labels`` scope the stream to an experiment or estimator so that two
    estimators inside one run never share draws.
    """

    seed: int
    index: int = 0
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 bits")
        if self.index < 0:
            raise ValueError("replicate index must be nonnegative")

    def child(self, label: str) -> "RngStream":
        """A sub-stream scoped by one more label."""
        return RngStream(self.seed, self.index, self.labels + (label,))

    def replicate(self, index: int) -> "RngStream":
        return RngStream(self.seed, index, self.labels)

    def entropy_words(self) -> list[int]:
        words = [self.seed & 0xFFFFFFFF, self.seed >> 32]
        for label in self.labels:
            words.extend(_label_words(label))
        words.append(self.index)
        return words

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.entropy_words())))

    def fingerprint(self) -> str:
        """Short stable hex tag identifying the stream, for reports."""
        blob = ",".join(str(w) for w in self.entropy_words()).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

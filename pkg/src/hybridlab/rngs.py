"""Deterministic, splittable randomness for campaigns."""
from __future__ import annotations

import random

import numpy as np


def spawn(seed: int, n: int) -> list[random.Random]:
    """`n` independent generators derived from one campaign seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [random.Random(int.from_bytes(c.generate_state(2, np.uint64).tobytes(), "little")) for c in children]

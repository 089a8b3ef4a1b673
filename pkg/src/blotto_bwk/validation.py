"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InvalidInputError


def check_allocation(u, n=None, name="allocation"):
    """Return ``u`` as a 1-d int64 array of nonnegative troop counts."""
    arr = np.asarray(u)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise InvalidInputError(f"{name} must contain integers")
    elif arr.dtype.kind not in "iub":
        raise InvalidInputError(f"{name} must contain integers, got dtype {arr.dtype}")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise InvalidInputError(f"{name} must be nonnegative")
    if n is not None and arr.shape[0] != n:
        raise InvalidInputError(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr


def check_battlefield_weights(weights, n):
    """Validate battlefield weights: ``n`` positive entries summing to one."""
    if weights is None:
        return np.full(n, 1.0 / n)
    b = np.asarray(weights, dtype=float)
    if b.ndim != 1 or b.shape[0] != n:
        raise InvalidInputError(f"weights must have length {n}, got shape {b.shape}")
    if not np.all(np.isfinite(b)) or np.any(b <= 0):
        raise InvalidInputError("weights must be finite and positive")
    if abs(b.sum() - 1.0) > 1e-12:
        raise InvalidInputError(f"weights must sum to 1 (sum = {b.sum()!r})")
    return b


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_generator(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`.

    Accepts None, an int, a sequence of ints (used as SeedSequence entropy),
    a SeedSequence, or an existing Generator (returned as is).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if seed is None or isinstance(seed, numbers.Integral):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence([int(s) for s in seed]))


def seed_sequence(seed):
    """Normalize ``seed`` (int or sequence of ints) into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, numbers.Integral):
        return np.random.SeedSequence(int(seed))
    return np.random.SeedSequence([int(s) for s in seed])

"""Deterministic derivation of independent RNG stream seeds."""

import hashlib


def derive_seed(*parts) -> int:
    """Fold a tuple of labels (ints, strings, floats) into a 63-bit seed.

    The same parts always produce the same seed regardless of process,
    platform or hash randomization, so every RNG stream in a run can be
    reconstructed from the master seed plus its labels.
    """
    text = "\x1f".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def derive_seed32(*parts) -> int:
    """Like derive_seed but bounded to 32 bits for MT19937-style seeding."""
    return derive_seed(*parts) & 0xFFFFFFFF

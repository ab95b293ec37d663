"""
Action index <-> user subset codec.

Actions enumerate all subsets of 1..N users out of L: every singleton in
lexicographic order, then every pair, and so on. Ranking within one size
uses the combinatorial number system, so neither direction needs a table.
"""

from functools import lru_cache
from math import comb
from typing import Iterable, Tuple

import numpy as np


UserSubset = Tuple[int, ...]


class ActionCodecError(ValueError):
    """Raised for out-of-range indices or malformed subsets."""
    pass


def _check_sizes(num_users: int, max_selected: int) -> None:
    if not 1 <= max_selected <= num_users:
        raise ActionCodecError(f"Need 1 <= N <= L, got N={max_selected}, L={num_users}")


def action_count(num_users: int, max_selected: int) -> int:
    """Sum of C(L, i) for i = 1..N."""
    _check_sizes(num_users, max_selected)
    return sum(comb(num_users, i) for i in range(1, max_selected + 1))


def _size_offset(num_users: int, size: int) -> int:
    return sum(comb(num_users, i) for i in range(1, size))


def _lex_rank(members: UserSubset, num_users: int) -> int:
    k = len(members)
    rank, prev = 0, -1
    for i, c in enumerate(members):
        for j in range(prev + 1, c):
            rank += comb(num_users - 1 - j, k - 1 - i)
        prev = c
    return rank


def _lex_unrank(rank: int, num_users: int, k: int) -> UserSubset:
    members = []
    x = 0
    for i in range(k):
        while True:
            block = comb(num_users - 1 - x, k - 1 - i)
            if rank < block:
                break
            rank -= block
            x += 1
        members.append(x)
        x += 1
    return tuple(members)


def encode_action(subset: Iterable[int], num_users: int, max_selected: int) -> int:
    """Index of ``subset`` in the action set."""
    _check_sizes(num_users, max_selected)
    members = tuple(int(u) for u in subset)
    if not 1 <= len(members) <= max_selected:
        raise ActionCodecError(f"Subset size {len(members)} outside 1..{max_selected}")
    if any(b <= a for a, b in zip(members, members[1:])):
        raise ActionCodecError(f"Subset {members} is not strictly increasing")
    if members[0] < 0 or members[-1] >= num_users:
        raise ActionCodecError(f"Subset {members} has users outside 0..{num_users - 1}")
    return _size_offset(num_users, len(members)) + _lex_rank(members, num_users)


def decode_action(index: int, num_users: int, max_selected: int) -> UserSubset:
    """Subset for action ``index``."""
    total = action_count(num_users, max_selected)
    if not 0 <= index < total:
        raise ActionCodecError(f"Action {index} outside [0, {total})")
    rest = int(index)
    for size in range(1, max_selected + 1):
        block = comb(num_users, size)
        if rest < block:
            return _lex_unrank(rest, num_users, size)
        rest -= block
    raise ActionCodecError(f"Action {index} could not be decoded")  # unreachable


@lru_cache(maxsize=32)
def all_subsets(num_users: int, max_selected: int) -> Tuple[UserSubset, ...]:
    """Every subset in action-index order."""
    return tuple(
        decode_action(a, num_users, max_selected)
        for a in range(action_count(num_users, max_selected))
    )


@lru_cache(maxsize=32)
def selection_matrix(num_users: int, max_selected: int) -> np.ndarray:
    """Boolean (|A|, L) matrix, row a marks the users of action a."""
    subsets = all_subsets(num_users, max_selected)
    mask = np.zeros((len(subsets), num_users), dtype=bool)
    for a, members in enumerate(subsets):
        mask[a, list(members)] = True
    mask.setflags(write=False)
    return mask

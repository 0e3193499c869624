"""Time-frequency resource assignment.

Allocations are boolean ``(K, F, C)`` arrays: ``alloc[k, f, c]`` is set when
RB ``f`` of the slot using configuration ``c`` belongs to user ``k``.  All
tie-breaks go to the lowest index so outputs are deterministic.
"""
from __future__ import annotations

import csv

import numpy as np


class InfeasibleAllocation(ValueError):
    """Raised when max-min cannot give every user at least one resource."""


def _as_tensor(rates) -> np.ndarray:
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 3 or 0 in rates.shape:
        raise ValueError(f"expected a non-empty (K, F, C) tensor, got shape {rates.shape}")
    return rates


def max_rate_allocate(rates) -> np.ndarray:
    """Give each (RB, slot) to the user with the highest robust rate."""
    rates = _as_tensor(rates)
    K = rates.shape[0]
    best = np.argmax(rates, axis=0)
    return best[None, :, :] == np.arange(K)[:, None, None]


def _max_min_flat(r: np.ndarray, overload: str = "raise") -> np.ndarray:
    """Greedy max-min on a ``(K, A)`` matrix; returns the owner of each resource.

    Phase one hands every user, in index order, its best free resource;
    phase two repeatedly serves the user with the lowest accumulated rate.
    With ``overload="truncate"`` and ``K > A`` the users left over after the
    resources run out in phase one get nothing.
    """
    K, A = r.shape
    if K > A and overload == "raise":
        raise InfeasibleAllocation(f"{K} users but only {A} resources")
    owner = np.full(A, -1, dtype=int)
    free = np.ones(A, dtype=bool)
    total = np.zeros(K)
    masked = r.copy()
    for k in range(min(K, A)):
        a = int(np.argmax(masked[k]))
        owner[a] = k
        total[k] += r[k, a]
        free[a] = False
        masked[:, a] = -np.inf
    if K > A:
        return owner
    # best-first resource order per user; skip resources already taken
    order = np.argsort(-r, axis=1, kind="stable")
    cursor = np.zeros(K, dtype=int)
    for _ in range(int(free.sum())):
        k = int(np.argmin(total))
        while not free[order[k, cursor[k]]]:
            cursor[k] += 1
        a = int(order[k, cursor[k]])
        owner[a] = k
        total[k] += r[k, a]
        free[a] = False
    return owner


def _flatten(rates: np.ndarray) -> np.ndarray:
    # resource a = c * F + f: slot outer, RB inner
    K, F, C = rates.shape
    return rates.transpose(0, 2, 1).reshape(K, C * F)


def _owner_to_alloc(owner: np.ndarray, K: int, F: int, C: int) -> np.ndarray:
    alloc = np.zeros((K, C * F), dtype=bool)
    taken = owner >= 0
    alloc[owner[taken], np.flatnonzero(taken)] = True
    return alloc.reshape(K, C, F).transpose(0, 2, 1)


def max_min_allocate(rates, overload: str = "raise") -> np.ndarray:
    """Greedy max-min fairness over the whole (RB, slot) grid."""
    rates = _as_tensor(rates)
    K, F, C = rates.shape
    owner = _max_min_flat(_flatten(rates), overload)
    return _owner_to_alloc(owner, K, F, C)


def assign_configs(user_azimuths, center_azimuths) -> np.ndarray:
    """Configuration (0-based) whose beam center is nearest in azimuth."""
    user_azimuths = np.atleast_1d(np.asarray(user_azimuths, dtype=float))
    centers = np.asarray(getattr(center_azimuths, "center_azimuths", center_azimuths),
                         dtype=float)
    if centers.size == 0:
        raise ValueError("empty codebook")
    return np.argmin(np.abs(centers[None, :] - user_azimuths[:, None]), axis=1)


def sequential_allocate(rates, partition, objective: str = "max_rate",
                        overload: str = "raise") -> np.ndarray:
    """Allocate the RBs of each slot among the users bound to that slot.

    ``partition[k]`` is the configuration index of user ``k``.  Slots nobody
    is bound to stay empty.
    """
    rates = _as_tensor(rates)
    K, F, C = rates.shape
    partition = np.asarray(partition, dtype=int)
    if partition.shape != (K,):
        raise ValueError(f"partition must have length {K}")
    if objective not in ("max_rate", "max_min"):
        raise ValueError(f"unknown objective {objective!r}")
    alloc = np.zeros((K, F, C), dtype=bool)
    for c in range(C):
        users = np.flatnonzero(partition == c)
        if users.size == 0:
            continue
        sub = rates[users, :, c]
        if objective == "max_rate":
            owner = np.argmax(sub, axis=0)
        else:
            if users.size > F and overload == "raise":
                raise InfeasibleAllocation(
                    f"slot {c}: {users.size} users but only {F} RBs")
            owner = _max_min_flat(sub, overload)
        taken = owner >= 0
        alloc[users[owner[taken]], np.flatnonzero(taken), c] = True
    return alloc


def user_rates(rates, alloc) -> np.ndarray:
    """Aggregate spectral efficiency of each user under ``alloc``."""
    rates = np.asarray(rates, dtype=float)
    alloc = np.asarray(alloc)
    if rates.shape != alloc.shape:
        raise ValueError(f"shape mismatch {rates.shape} vs {alloc.shape}")
    return np.where(alloc, rates, 0.0).sum(axis=(1, 2))


def is_exclusive(alloc) -> bool:
    return bool(np.all(np.asarray(alloc).sum(axis=0) <= 1))


def allocation_grid(alloc) -> np.ndarray:
    """Owner of each (slot, RB) cell, ``-1`` when empty; shape (C, F)."""
    alloc = np.asarray(alloc, dtype=bool)
    owner = np.where(alloc.any(axis=0), np.argmax(alloc, axis=0), -1)
    return owner.T


def allocation_to_csv(alloc, path):
    grid = allocation_grid(alloc)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot"] + [f"rb_{f}" for f in range(grid.shape[1])])
        for c, row in enumerate(grid):
            w.writerow([c] + [int(v) for v in row])

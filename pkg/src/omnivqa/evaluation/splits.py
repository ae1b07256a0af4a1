"""Content-grouped train/test partitions and split files."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ManifestError, SplitOverlapError, TooFewGroupsError


def repeat_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Sub-seed for repeat ``index``; independent of execution order."""
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


def grouped_shuffle_split(groups: Sequence, test_fraction: float = 0.2, seed=0):
    """Partition sample indices so that every group lands on one side.

    Returns ``(train_idx, test_idx)`` as sorted integer arrays.  The number of
    test groups is ``round(test_fraction * n_groups)``, at least 1 and at
    most ``n_groups - 1``.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    groups = np.asarray([str(g) for g in groups])
    uniq = np.unique(groups)
    if uniq.size < 2:
        raise TooFewGroupsError(f"need >= 2 groups, got {uniq.size}")
    n_test = int(math.floor(test_fraction * uniq.size + 0.5))
    n_test = min(max(n_test, 1), uniq.size - 1)
    rng = np.random.default_rng(seed)
    test_groups = uniq[rng.permutation(uniq.size)[:n_test]]
    is_test = np.isin(groups, test_groups)
    return np.flatnonzero(~is_test), np.flatnonzero(is_test)


def read_split_file(path) -> tuple[list[str], list[str]]:
    """Parse ``[train]`` / ``[test]`` sections of video ids, one per line."""
    sections = {"train": [], "test": []}
    current = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in sections:
                raise ManifestError(f"{path}:{lineno}: unknown section [{current}]")
            continue
        if current is None:
            raise ManifestError(f"{path}:{lineno}: video id outside a section")
        sections[current].append(line)
    overlap = set(sections["train"]) & set(sections["test"])
    if overlap:
        raise SplitOverlapError(f"ids in both train and test: {sorted(overlap)[:5]}")
    return sections["train"], sections["test"]


def write_split_file(path, train_ids, test_ids) -> None:
    lines = ["[train]", *train_ids, "", "[test]", *test_ids, ""]
    Path(path).write_text("\n".join(lines))

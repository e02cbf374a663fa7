# src/utils/rng.py
"""
Counter-based random streams for reproducible Monte Carlo work

Every estimator splits its samples into fixed-size blocks. Block ``b`` and
stream ``s`` (a coordinate index, or a role such as "resample") always draw
from Philox keyed by ``SeedSequence(seed, spawn_key=(b, s))``, so the output
of a run depends only on the seed and never on how many workers processed it.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar
import logging

import numpy as np
from tqdm import tqdm

from ..core.config import MONTE_CARLO_CONFIG

logger = logging.getLogger(__name__)

T = TypeVar("T")


def block_generator(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    """
    Philox generator for one (block, stream) cell

    Args:
        seed (int): 64-bit experiment seed
        block (int): Block index
        stream (int): Sub-stream index inside the block

    Returns:
        np.random.Generator: Independent, reproducible generator
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(block), int(stream)))
    return np.random.Generator(np.random.Philox(sequence))


def block_sizes(total: int, block_size: Optional[int] = None) -> List[int]:
    """Split `total` draws into consecutive blocks of at most `block_size`"""
    block_size = int(block_size or MONTE_CARLO_CONFIG["block_size"])
    full, rest = divmod(int(total), block_size)
    sizes = [block_size] * full
    if rest:
        sizes.append(rest)
    return sizes


def run_blocks(func: Callable[[int, int], T], total: int, workers: Optional[int] = None,
               block_size: Optional[int] = None, desc: str = "blocks") -> List[T]:
    """
    Apply ``func(block_index, block_len)`` to every block

    Results are returned in block order whatever the worker count.

    Args:
        func: Work function for one block
        total (int): Total number of draws
        workers (int): Thread count (defaults to MONTE_CARLO_CONFIG)
        block_size (int): Draws per block
        desc (str): Progress bar label

    Returns:
        List: Per-block results in block order
    """
    sizes = block_sizes(total, block_size)
    workers = int(workers or MONTE_CARLO_CONFIG["workers"])
    show = bool(MONTE_CARLO_CONFIG["progress"])
    logger.debug("running %d blocks of %s on %d worker(s)", len(sizes), desc, workers)

    if workers == 1:
        return [func(b, size) for b, size in tqdm(list(enumerate(sizes)), desc=desc, disable=not show)]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, b, size) for b, size in enumerate(sizes)]
        return [future.result() for future in tqdm(futures, desc=desc, disable=not show)]


__all__ = ['block_generator', 'block_sizes', 'run_blocks']

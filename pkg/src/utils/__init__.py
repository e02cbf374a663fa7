# ===============================================
# src/utils/__init__.py
# ===============================================
"""
Utility modules for hierstab
Seeded random streams, block scheduling and artifact helpers
"""

from .rng import block_generator, block_sizes, run_blocks
from .io_utils import parse_range, to_jsonable, atomic_write_text, render_json, render_csv

__all__ = [
    'block_generator', 'block_sizes', 'run_blocks',
    'parse_range', 'to_jsonable', 'atomic_write_text', 'render_json', 'render_csv'
]

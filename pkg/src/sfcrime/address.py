"""Address-derived features: the block number and the block/intersection flag.

Addresses in the SF incident data come in two shapes::

    800 Block of BRYANT ST      (block address)
    OAK ST / LAGUNA ST          (intersection)
"""

import re

# Capped at 9 digits: real block numbers are at most 5, and the cap keeps the
# function total (no huge-int conversion) on arbitrary input.
_STREET_NO = re.compile(r"\s*([0-9]{1,9})\s+block\s+of\b", re.IGNORECASE | re.ASCII)
_BLOCK_WORD = re.compile(r"\bblock\b", re.IGNORECASE | re.ASCII)


def extract_street_number(address: str) -> int:
    """Leading number of a ``"<N> Block of <street>"`` address, else 0."""
    m = _STREET_NO.match(address)
    return int(m.group(1)) if m else 0


def extract_block_flag(address: str) -> int:
    """1 if the address contains the whole word "block" (any case), else 0."""
    return 1 if _BLOCK_WORD.search(address) else 0

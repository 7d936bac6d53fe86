"""Sobol' low-discrepancy points from a direction-number file.

Direction numbers are ingested from the widely used text format with one
row per dimension beyond the first: ``d s a m_1 ... m_s`` where ``s`` is
the degree of the primitive polynomial, ``a`` encodes its interior
coefficient bits, and the m_k are the odd initial direction integers.
Dimension 1 needs no table row (all m_k = 1).  Points are produced in the
standard Gray-code order; the all-zeros first point is skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

_BITS = 32
_SCALE = 2.0 ** (-_BITS)


class DirectionFileError(ValueError):
    """Malformed direction-number file."""


@dataclass(frozen=True)
class _Row:
    degree: int
    a: int
    m: tuple


class DirectionNumbers:
    """Parsed direction-number table, keyed by dimension index (>= 2)."""

    def __init__(self, rows: dict):
        self._rows = rows
        self.max_dim = (max(rows) if rows else 1)

    @classmethod
    def from_file(cls, path) -> "DirectionNumbers":
        rows: dict[int, _Row] = {}
        text = Path(path).read_text(encoding="utf-8")
        for ln, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if ln == 1 and not line.split()[0].isdigit():
                continue  # header line like "d s a m_i"
            parts = line.split()
            try:
                vals = [int(tok) for tok in parts]
            except ValueError:
                raise DirectionFileError(f"line {ln}: non-integer token")
            if len(vals) < 4:
                raise DirectionFileError(f"line {ln}: expected 'd s a m_1..m_s'")
            d, deg, a = vals[0], vals[1], vals[2]
            m = vals[3:]
            if len(m) != deg:
                raise DirectionFileError(
                    f"line {ln}: degree {deg} but {len(m)} initial numbers"
                )
            if d < 2:
                raise DirectionFileError(f"line {ln}: dimension must be >= 2")
            rows[d] = _Row(degree=deg, a=a, m=tuple(m))
        return cls(rows)

    def direction_integers(self, dim: int) -> np.ndarray:
        """32-bit direction integers v_1..v_32 for one dimension (1-based)."""
        v = np.zeros(_BITS, dtype=np.uint64)
        if dim == 1:
            for k in range(_BITS):
                v[k] = 1 << (_BITS - 1 - k)
            return v
        row = self._rows.get(dim)
        if row is None:
            raise DirectionFileError(
                f"direction file covers dimensions up to {self.max_dim}, "
                f"dimension {dim} requested"
            )
        deg = row.degree
        m = list(row.m)
        # recurrence m_k = 2 a_1 m_{k-1} ^ 4 a_2 m_{k-2} ^ ... ^ 2^deg m_{k-deg} ^ m_{k-deg}
        abits = [(row.a >> (deg - 2 - i)) & 1 for i in range(deg - 1)]
        for k in range(deg, _BITS):
            new = m[k - deg] ^ (m[k - deg] << deg)
            for i, bit in enumerate(abits):
                if bit:
                    new ^= m[k - 1 - i] << (i + 1)
            m.append(new)
        for k in range(_BITS):
            v[k] = m[k] << (_BITS - 1 - k)
        return v


def sobol_points(count: int, dim: int, table: DirectionNumbers) -> np.ndarray:
    """First ``count`` Sobol' points in ``dim`` dimensions, zero point skipped.

    Gray-code construction: point i flips the direction integer indexed by
    the lowest zero bit of i - 1.  Deterministic and unscrambled.
    """
    if count < 1 or dim < 1:
        raise ValueError("count and dim must be positive")
    if dim > table.max_dim:
        raise DirectionFileError(
            f"direction file covers dimensions up to {table.max_dim}, "
            f"{dim} requested"
        )
    v = np.stack([table.direction_integers(d) for d in range(1, dim + 1)])
    state = np.zeros(dim, dtype=np.uint64)
    out = np.empty((count, dim))
    for i in range(1, count + 1):
        c = _lowest_zero_bit(i - 1)
        state ^= v[:, c]
        out[i - 1] = state * _SCALE
    return out


def _lowest_zero_bit(i: int) -> int:
    c = 0
    while i & 1:
        i >>= 1
        c += 1
    return c

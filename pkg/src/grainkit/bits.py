"""Packing between bit sequences and lowercase hex text.

Default convention: bit m lives at bit (m mod 8) of byte floor(m/8),
least-significant bit first within a byte; byte 0 is rendered first and a
trailing partial byte is zero-padded in its high bits.  The "msb" order
flips the in-byte position to (7 - m mod 8) for interop with sources that
publish vectors most-significant-bit first.
"""

from __future__ import annotations

from typing import Iterable, Sequence

__all__ = ["pack_bits", "unpack_hex"]

_ORDERS = ("lsb", "msb")


def _bitpos(m: int, order: str) -> int:
    return m % 8 if order == "lsb" else 7 - m % 8


def pack_bits(bits: Sequence[int] | Iterable[int], order: str = "lsb") -> str:
    if order not in _ORDERS:
        raise ValueError(f"unknown bit order {order!r}")
    data = bytearray()
    for m, bit in enumerate(bits):
        if bit not in (0, 1):
            raise ValueError(f"bit {m} is {bit!r}, expected 0 or 1")
        if m % 8 == 0:
            data.append(0)
        data[-1] |= bit << _bitpos(m, order)
    return data.hex()


def unpack_hex(text: str, nbits: int | None = None, order: str = "lsb") -> tuple[int, ...]:
    """Decode hex text back to bits; inverse of :func:`pack_bits`.

    With ``nbits`` the input length must match exactly and any padding
    bits beyond ``nbits`` must be zero.
    """
    if order not in _ORDERS:
        raise ValueError(f"unknown bit order {order!r}")
    text = text.strip()
    if len(text) % 2 != 0:
        raise ValueError("hex text must have an even number of digits")
    try:
        data = bytes.fromhex(text)
    except ValueError:
        raise ValueError(f"not valid hex text: {text!r}") from None
    bits = tuple((data[m // 8] >> _bitpos(m, order)) & 1 for m in range(8 * len(data)))
    if nbits is None:
        return bits
    want_bytes = (nbits + 7) // 8
    if len(data) != want_bytes:
        raise ValueError(
            f"expected {want_bytes} bytes ({nbits} bits), got {len(data)} bytes"
        )
    if any(bits[nbits:]):
        raise ValueError("nonzero padding bits beyond the requested length")
    return bits[:nbits]

"""The Grain-80 and Grain-128 ciphers over the register-system engine.

Key and IV load straight into the registers (key into the NLFSR "b", IV
into the low LFSR "s" bits, remaining LFSR bits set to one).  During
initialization the Z output is XORed into the top bit of both registers
and nothing is emitted; afterwards the loops open and Z is the
keystream.

Galois configurations support two initialization modes.  ``native``
clocks the variant's own system through the init phase.  ``equivalence``
instead initializes the Fibonacci sibling and converts the resulting
register contents with the initial-state mapping, which provably
reproduces the sibling's keystream bit for bit.  The two modes disagree
on Galois variants; this library verifies the equivalence-mode claim and
leaves native mode as a deterministic behavior of its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .bits import pack_bits, unpack_hex
from .engine import SystemSpec, SystemState, run
from .specfile import SpecDocument
from .transform import map_initial_state
from . import variants as _variants

__all__ = [
    "INIT_MODE",
    "KeyIv",
    "GrainVariant",
    "UnknownVariantError",
    "VARIANT_NAMES",
    "variant",
    "load",
    "initialize",
    "generate_keystream",
    "keystream",
    "state_to_hex",
    "state_from_hex",
]

INIT_MODE = "init"
VARIANT_NAMES = _variants.VARIANT_NAMES


class UnknownVariantError(KeyError):
    def __init__(self, name: str):
        super().__init__(
            f"unknown variant {name!r}; known variants: {', '.join(VARIANT_NAMES)}"
        )


@dataclass(frozen=True)
class KeyIv:
    key: tuple[int, ...]
    iv: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "key", tuple(int(b) & 1 for b in self.key))
        object.__setattr__(self, "iv", tuple(int(b) & 1 for b in self.iv))

    @classmethod
    def from_hex(
        cls,
        key_hex: str,
        iv_hex: str,
        key_bits: int,
        iv_bits: int,
        order: str = "lsb",
    ) -> "KeyIv":
        return cls(
            unpack_hex(key_hex, key_bits, order), unpack_hex(iv_hex, iv_bits, order)
        )


@dataclass(frozen=True)
class GrainVariant:
    """One registry entry: a system plus its cipher-level metadata."""

    name: str
    system: SystemSpec
    key_bits: int
    iv_bits: int
    init_cycles: int
    parallel_degree: int
    repair: str
    fib_sibling: str
    terminals: Mapping[str, int]
    document: SpecDocument

    def fib_variant(self) -> "GrainVariant":
        return variant(self.fib_sibling, self.repair)

    def is_fibonacci(self) -> bool:
        return self.name == self.fib_sibling


_cache: dict[tuple[str, str], GrainVariant] = {}


def variant(name: str, repair: str = "official") -> GrainVariant:
    """Look up one of the bundled cipher configurations."""
    key = (name, repair)
    if key not in _cache:
        if name not in VARIANT_NAMES:
            raise UnknownVariantError(name)
        key_bits, iv_bits, init_cycles, degree, sibling, b_terminal = (
            _variants.metadata(name)
        )
        doc, system = _variants.build_system(name, repair)
        _cache[key] = GrainVariant(
            name=name,
            system=system,
            key_bits=key_bits,
            iv_bits=iv_bits,
            init_cycles=init_cycles,
            parallel_degree=degree,
            repair=repair,
            fib_sibling=sibling,
            terminals={"b": b_terminal, "s": key_bits - 1},
            document=doc,
        )
    return _cache[key]


def load(v: GrainVariant, keyiv: KeyIv) -> SystemState:
    """Fresh pre-init state: key in the NLFSR, IV plus ones in the LFSR."""
    if len(keyiv.key) != v.key_bits:
        raise ValueError(f"key must be {v.key_bits} bits, got {len(keyiv.key)}")
    if len(keyiv.iv) != v.iv_bits:
        raise ValueError(f"iv must be {v.iv_bits} bits, got {len(keyiv.iv)}")
    lfsr = keyiv.iv + (1,) * (v.key_bits - v.iv_bits)
    return SystemState.from_bits(v.system, {"b": keyiv.key, "s": lfsr})


def initialize(v: GrainVariant, state: SystemState, mode: str = "native") -> SystemState:
    """Clock through the init phase; no keystream is produced.

    ``native`` runs the variant's own system.  ``equivalence`` runs the
    Fibonacci sibling and maps the resulting register contents into this
    variant's configuration.
    """
    if state.cycle != 0:
        raise ValueError("initialize expects a freshly loaded state")
    if mode == "native":
        _, out = run(v.system, state, v.init_cycles, modes={INIT_MODE})
        return out
    if mode != "equivalence":
        raise ValueError(f"unknown initialization mode {mode!r}")
    fib = v.fib_variant()
    fib_state = SystemState(state.regs, 0)
    _, fib_done = run(fib.system, fib_state, v.init_cycles, modes={INIT_MODE})
    if v.is_fibonacci():
        return fib_done
    mapped = {}
    for reg in v.system.registers:
        fib_reg = fib.system.register(reg.id)
        bits = fib_done.bits(reg.id)
        if fib_reg == reg:
            mapped[reg.id] = bits
        else:
            mapped[reg.id] = map_initial_state(fib_reg, reg, bits)
    return SystemState.from_bits(v.system, mapped, cycle=fib_done.cycle)


def generate_keystream(
    v: GrainVariant, state: SystemState, nbits: int
) -> tuple[tuple[int, ...], SystemState]:
    """Emit Z then step, nbits times, with the init loops open."""
    traces, out = run(v.system, state, nbits, modes=frozenset(), watch=("Z",))
    return traces.get("Z", ()), out


def keystream(
    v: GrainVariant, keyiv: KeyIv, nbits: int, mode: str = "equivalence"
) -> tuple[int, ...]:
    """Load, initialize and generate in one call."""
    bits, _ = generate_keystream(v, initialize(v, load(v, keyiv), mode), nbits)
    return bits


def state_to_hex(v: GrainVariant, state: SystemState) -> str:
    """Serialize register contents as hex, registers in system order.

    Each register is packed separately (LSB-first bytes).  A nonzero
    cycle counter is appended as ``@<cycle>`` so the round trip is
    lossless mid-run.
    """
    parts = [pack_bits(state.bits(reg.id)) for reg in v.system.registers]
    text = "".join(parts)
    if state.cycle:
        text += f"@{state.cycle}"
    return text


def state_from_hex(v: GrainVariant, text: str) -> SystemState:
    text = text.strip()
    cycle = 0
    if "@" in text:
        text, _, suffix = text.partition("@")
        if not suffix.isdigit():
            raise ValueError(f"bad cycle suffix {suffix!r}")
        cycle = int(suffix)
    values: dict[str, Sequence[int]] = {}
    pos = 0
    for reg in v.system.registers:
        digits = 2 * ((reg.length + 7) // 8)
        chunk = text[pos : pos + digits]
        if len(chunk) != digits:
            raise ValueError(
                f"state text too short: register {reg.id!r} needs {digits} hex digits"
            )
        values[reg.id] = unpack_hex(chunk, reg.length)
        pos += digits
    if pos != len(text):
        raise ValueError(f"trailing characters after state: {text[pos:]!r}")
    return SystemState.from_bits(v.system, values, cycle=cycle)

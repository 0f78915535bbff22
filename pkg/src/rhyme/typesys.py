"""Type system: classical/quantum kinds, width configuration, value <-> basis pattern codec.

Every quantum type is backed by a register of as many qubits as the bit-width
of its classical counterpart.  The basis states of the register are exactly
the representable values of that classical type, so encode/decode is a total
bijection between bit patterns and representable values (strings are the one
exception: non-canonical patterns with bits after the first NUL slot decode
by NUL termination).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

ASCII_BITS = 7  # chars are 7-bit ASCII, so a qchar is a dimension-128 qudit


class EncodingError(ValueError):
    """A classical value does not fit the target type under the active widths."""


class Kind(Enum):
    BIT = "bit"
    BIT_ARRAY = "bit[]"
    INT = "int"
    FLOAT = "float"
    COMPLEX = "complex"
    CHAR = "char"
    STRING = "string"
    BOOL = "bool"
    REF = "ref"
    QBIT = "qbit"
    QBIT_ARRAY = "qbit[]"
    QINT = "qint"
    QFLOAT = "qfloat"
    QCOMPLEX = "qcomplex"
    QCHAR = "qchar"
    QSTRING = "qstring"
    QBOOL = "qbool"
    QREF = "qref"


_QUANTUM_OF = {
    Kind.BIT: Kind.QBIT,
    Kind.BIT_ARRAY: Kind.QBIT_ARRAY,
    Kind.INT: Kind.QINT,
    Kind.FLOAT: Kind.QFLOAT,
    Kind.COMPLEX: Kind.QCOMPLEX,
    Kind.CHAR: Kind.QCHAR,
    Kind.STRING: Kind.QSTRING,
    Kind.BOOL: Kind.QBOOL,
    Kind.REF: Kind.QREF,
}
_CLASSICAL_OF = {q: c for c, q in _QUANTUM_OF.items()}


@dataclass(frozen=True)
class RhymeType:
    """A surface type; `length` is the element count for array kinds (None while unknown)."""

    kind: Kind
    length: int | None = None

    def __str__(self) -> str:
        return self.kind.value

    @property
    def is_quantum(self) -> bool:
        return self.kind in _CLASSICAL_OF

    @property
    def is_array(self) -> bool:
        return self.kind in (Kind.BIT_ARRAY, Kind.QBIT_ARRAY)

    def classical(self) -> "RhymeType":
        if self.kind in _CLASSICAL_OF:
            return RhymeType(_CLASSICAL_OF[self.kind], self.length)
        return self

    def quantum(self) -> "RhymeType":
        if self.kind in _QUANTUM_OF:
            return RhymeType(_QUANTUM_OF[self.kind], self.length)
        return self


@dataclass(frozen=True)
class TypeConfig:
    """Compile-time widths; fixed for a whole compilation unit."""

    int_bits: int = 16
    float_total_bits: int = 16
    float_frac_bits: int = 8
    string_max_len: int = 3
    ref_bits: int = 4

    def __post_init__(self) -> None:
        if self.int_bits < 1 or self.float_total_bits < 1 or self.ref_bits < 1:
            raise ValueError("all widths must be >= 1")
        if self.string_max_len < 1:
            raise ValueError("string_max_len must be >= 1")
        if not 0 <= self.float_frac_bits < self.float_total_bits:
            raise ValueError("float_frac_bits must satisfy 0 <= frac < total")

    def as_dict(self) -> dict:
        return {
            "int": self.int_bits,
            "float_total": self.float_total_bits,
            "float_frac": self.float_frac_bits,
            "string": self.string_max_len,
            "ref": self.ref_bits,
        }


class Address(NamedTuple):
    """A ref value.

    Quantum addresses index quantum variables densely in declaration order and
    are the only ones encodable into a qref register; classical addresses just
    name a classical symbol and never cross the quantum boundary.
    """

    index: int
    quantum: bool = True


def width(t: RhymeType, cfg: TypeConfig) -> int:
    """Bit width of a type (for quantum kinds: qubit count of the register)."""
    k = t.kind
    if k in (Kind.BIT, Kind.QBIT, Kind.BOOL, Kind.QBOOL):
        return 1
    if k in (Kind.BIT_ARRAY, Kind.QBIT_ARRAY):
        if t.length is None:
            raise ValueError("array width requires a known length")
        return t.length
    if k in (Kind.INT, Kind.QINT):
        return cfg.int_bits
    if k in (Kind.FLOAT, Kind.QFLOAT):
        return cfg.float_total_bits
    if k in (Kind.COMPLEX, Kind.QCOMPLEX):
        return 2 * cfg.float_total_bits
    if k in (Kind.CHAR, Kind.QCHAR):
        return ASCII_BITS
    if k in (Kind.STRING, Kind.QSTRING):
        return ASCII_BITS * cfg.string_max_len
    if k in (Kind.REF, Kind.QREF):
        return cfg.ref_bits
    raise ValueError(f"no width for {k}")


def dimension(t: RhymeType, cfg: TypeConfig) -> int:
    """Number of basis states of a quantum type's register."""
    if not t.is_quantum:
        raise ValueError(f"dimension() requires a quantum type, got {t}")
    return 1 << width(t, cfg)


def _encode_fixed(value: float, cfg: TypeConfig, warn: Callable[[str], None] | None) -> int:
    total, frac = cfg.float_total_bits, cfg.float_frac_bits
    scaled = value * (1 << frac)
    s = round(scaled)
    lo, hi = -(1 << (total - 1)), (1 << (total - 1)) - 1
    if s < lo or s > hi:
        s = min(max(s, lo), hi)
        if warn:
            warn(f"float {value!r} outside representable range, clamped to {s / (1 << frac)!r}")
    elif s != scaled and warn:
        warn(f"float {value!r} rounded to {s / (1 << frac)!r}")
    return s & ((1 << total) - 1)


def _decode_fixed(pattern: int, cfg: TypeConfig) -> float:
    total, frac = cfg.float_total_bits, cfg.float_frac_bits
    s = pattern
    if s >= 1 << (total - 1):
        s -= 1 << total
    return s / (1 << frac)


def encode(value, t: RhymeType, cfg: TypeConfig, warn: Callable[[str], None] | None = None) -> int:
    """Map a classical value to its basis-state bit pattern.

    Raises EncodingError when the value is not representable; floats round to
    the nearest grid point instead, reporting through `warn`.
    """
    k = t.kind
    if k in (Kind.BIT, Kind.QBIT):
        if value not in (0, 1):
            raise EncodingError(f"bit value must be 0 or 1, got {value!r}")
        return int(value)
    if k in (Kind.BOOL, Kind.QBOOL):
        return 1 if value else 0
    if k in (Kind.BIT_ARRAY, Kind.QBIT_ARRAY):
        bits = tuple(value)
        if t.length is not None and len(bits) != t.length:
            raise EncodingError(f"bit array length {len(bits)} != declared {t.length}")
        n = len(bits)
        pattern = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise EncodingError(f"bit array element must be 0 or 1, got {b!r}")
            pattern |= int(b) << (n - 1 - i)  # element 0 is the most significant bit
        return pattern
    if k in (Kind.INT, Kind.QINT):
        b = cfg.int_bits
        v = int(value)
        if not -(1 << (b - 1)) <= v < (1 << (b - 1)):
            raise EncodingError(f"integer {v} outside two's-complement range for {b} bits")
        return v & ((1 << b) - 1)
    if k in (Kind.FLOAT, Kind.QFLOAT):
        return _encode_fixed(float(value), cfg, warn)
    if k in (Kind.COMPLEX, Kind.QCOMPLEX):
        z = complex(value)
        re = _encode_fixed(z.real, cfg, warn)
        im = _encode_fixed(z.imag, cfg, warn)
        return (re << cfg.float_total_bits) | im
    if k in (Kind.CHAR, Kind.QCHAR):
        code = ord(value)
        if code >= 1 << ASCII_BITS:
            raise EncodingError(f"character {value!r} outside 7-bit ASCII")
        return code
    if k in (Kind.STRING, Kind.QSTRING):
        s = str(value)
        if len(s) > cfg.string_max_len:
            raise EncodingError(
                f"string {s!r} longer than configured maximum of {cfg.string_max_len}"
            )
        pattern = 0
        for i in range(cfg.string_max_len):
            code = ord(s[i]) if i < len(s) else 0
            if code >= 1 << ASCII_BITS:
                raise EncodingError(f"character {s[i]!r} outside 7-bit ASCII")
            pattern |= code << (ASCII_BITS * (cfg.string_max_len - 1 - i))
        return pattern
    if k in (Kind.REF, Kind.QREF):
        if not isinstance(value, Address):
            raise EncodingError(f"expected an address value, got {value!r}")
        if not value.quantum:
            raise EncodingError("only quantum variables are addressable in quantum refs")
        if not 0 <= value.index < (1 << cfg.ref_bits):
            raise EncodingError(
                f"address index {value.index} does not fit in {cfg.ref_bits} ref bits"
            )
        return value.index
    raise EncodingError(f"cannot encode values of type {t}")


def decode(pattern: int, t: RhymeType, cfg: TypeConfig):
    """Inverse of encode; total (every in-range pattern decodes)."""
    w = width(t, cfg)
    if not 0 <= pattern < (1 << w):
        raise ValueError(f"pattern {pattern} out of range for {t} (width {w})")
    k = t.kind
    if k in (Kind.BIT, Kind.QBIT):
        return pattern
    if k in (Kind.BOOL, Kind.QBOOL):
        return pattern == 1
    if k in (Kind.BIT_ARRAY, Kind.QBIT_ARRAY):
        n = t.length if t.length is not None else w
        return tuple((pattern >> (n - 1 - i)) & 1 for i in range(n))
    if k in (Kind.INT, Kind.QINT):
        b = cfg.int_bits
        return pattern - (1 << b) if pattern >= 1 << (b - 1) else pattern
    if k in (Kind.FLOAT, Kind.QFLOAT):
        return _decode_fixed(pattern, cfg)
    if k in (Kind.COMPLEX, Kind.QCOMPLEX):
        total = cfg.float_total_bits
        re = _decode_fixed(pattern >> total, cfg)
        im = _decode_fixed(pattern & ((1 << total) - 1), cfg)
        return complex(re, im)
    if k in (Kind.CHAR, Kind.QCHAR):
        return chr(pattern)
    if k in (Kind.STRING, Kind.QSTRING):
        chars = []
        for i in range(cfg.string_max_len):
            code = (pattern >> (ASCII_BITS * (cfg.string_max_len - 1 - i))) & ((1 << ASCII_BITS) - 1)
            if code == 0:
                break
            chars.append(chr(code))
        return "".join(chars)
    if k in (Kind.REF, Kind.QREF):
        return Address(pattern)
    raise ValueError(f"cannot decode type {t}")


def decode_domain(t: RhymeType, cfg: TypeConfig) -> list:
    """All decoded values of a type in pattern order (0 .. 2^width - 1).

    Equivalent to [decode(p, t, cfg) for p in range(2**width)] but fast enough
    to enumerate large register domains for truth tables.
    """
    w = width(t, cfg)
    k = t.kind
    if k in (Kind.BIT, Kind.QBIT):
        return [0, 1]
    if k in (Kind.BOOL, Kind.QBOOL):
        return [False, True]
    if k in (Kind.INT, Kind.QINT):
        half = 1 << (w - 1)
        return list(range(half)) + list(range(-half, 0))
    if k in (Kind.CHAR, Kind.QCHAR):
        return [chr(c) for c in range(1 << w)]
    if k in (Kind.FLOAT, Kind.QFLOAT):
        scale = 1.0 / (1 << cfg.float_frac_bits)
        half = 1 << (w - 1)
        return [p * scale for p in range(half)] + [p * scale for p in range(-half, 0)]
    if k in (Kind.STRING, Kind.QSTRING):
        n = cfg.string_max_len
        chunks = bytearray()
        for p in range(1 << w):
            for i in range(n):
                chunks.append((p >> (ASCII_BITS * (n - 1 - i))) & 0x7F)
        text = chunks.decode("latin1")
        return [text[i : i + n].split("\0", 1)[0] for i in range(0, len(text), n)]
    return [decode(p, t, cfg) for p in range(1 << w)]


def wrap_int(v: int, cfg: TypeConfig) -> int:
    """Two's-complement wraparound of an int to the configured width."""
    b = cfg.int_bits
    v &= (1 << b) - 1
    return v - (1 << b) if v >= 1 << (b - 1) else v

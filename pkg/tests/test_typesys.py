"""Encode/decode codec tests, including exhaustive bijection checks."""
import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhyme.typesys import (
    Address,
    EncodingError,
    Kind,
    RhymeType,
    TypeConfig,
    decode,
    dimension,
    encode,
    width,
)

CFG = TypeConfig()


def pack_string_oracle(s: str, max_len: int) -> int:
    # independent packing: left-aligned 7-bit slots, slot 0 most significant
    codes = [ord(c) for c in s] + [0] * (max_len - len(s))
    pattern = 0
    for code in codes:
        pattern = (pattern << 7) | code
    return pattern


def test_widths_default_config():
    assert width(RhymeType(Kind.QBIT), CFG) == 1
    assert width(RhymeType(Kind.QBIT_ARRAY, 4), CFG) == 4
    assert width(RhymeType(Kind.QINT), CFG) == 16
    assert width(RhymeType(Kind.QFLOAT), CFG) == 16
    assert width(RhymeType(Kind.QCOMPLEX), CFG) == 32
    assert width(RhymeType(Kind.QCHAR), CFG) == 7
    assert width(RhymeType(Kind.QSTRING), CFG) == 21
    assert width(RhymeType(Kind.QBOOL), CFG) == 1
    assert width(RhymeType(Kind.QREF), CFG) == 4


def test_qcomplex_width_twice_qfloat():
    for total in (8, 12, 16, 24):
        cfg = TypeConfig(float_total_bits=total, float_frac_bits=total // 2)
        assert width(RhymeType(Kind.QCOMPLEX), cfg) == 2 * width(RhymeType(Kind.QFLOAT), cfg)


def test_dimension_values():
    assert dimension(RhymeType(Kind.QCHAR), CFG) == 128
    assert dimension(RhymeType(Kind.QBIT), CFG) == 2
    assert dimension(RhymeType(Kind.QSTRING), CFG) == 2**21
    with pytest.raises(ValueError):
        dimension(RhymeType(Kind.INT), CFG)


def test_encode_int_examples():
    assert encode(15, RhymeType(Kind.QINT), CFG) == 0x000F
    assert encode(0, RhymeType(Kind.QBIT), CFG) == 0
    assert decode(0x000F, RhymeType(Kind.QINT), CFG) == 15
    # 160 must be representable under the default width
    assert decode(encode(160, RhymeType(Kind.QINT), CFG), RhymeType(Kind.QINT), CFG) == 160
    assert encode(-1, RhymeType(Kind.QINT), CFG) == 0xFFFF


def test_encode_int_out_of_range():
    with pytest.raises(EncodingError):
        encode(2**15, RhymeType(Kind.QINT), CFG)
    with pytest.raises(EncodingError):
        encode(-(2**15) - 1, RhymeType(Kind.QINT), CFG)


def test_encode_string_slots():
    # frozen from the slot layout: (65 << 14) | (66 << 7) | 0
    t = RhymeType(Kind.QSTRING)
    assert encode("AB", t, CFG) == (65 << 14) | (66 << 7)
    assert encode("AB", t, CFG) == pack_string_oracle("AB", 3)
    assert decode(0, t, CFG) == ""


def test_string_roundtrip_small_alphabet():
    t = RhymeType(Kind.QSTRING)
    for n in range(0, 4):
        for chars in itertools.product("ABC", repeat=n):
            s = "".join(chars)
            pattern = encode(s, t, CFG)
            assert pattern == pack_string_oracle(s, 3)
            assert decode(pattern, t, CFG) == s


def test_string_too_long():
    with pytest.raises(EncodingError):
        encode("ABCD", RhymeType(Kind.QSTRING), CFG)


def test_char_ascii_only():
    assert encode("A", RhymeType(Kind.QCHAR), CFG) == 65
    assert decode(65, RhymeType(Kind.QCHAR), CFG) == "A"
    with pytest.raises(EncodingError):
        encode("é", RhymeType(Kind.QCHAR), CFG)


@pytest.mark.parametrize(
    "t",
    [
        RhymeType(Kind.QCHAR),
        RhymeType(Kind.QBOOL),
        RhymeType(Kind.QBIT),
    ],
)
def test_bijection_exhaustive(t):
    seen = set()
    for pattern in range(dimension(t, CFG)):
        v = decode(pattern, t, CFG)
        assert encode(v, t, CFG) == pattern
        seen.add(pattern)
    assert len(seen) == dimension(t, CFG)


def test_bijection_exhaustive_qint8():
    cfg = TypeConfig(int_bits=8)
    t = RhymeType(Kind.QINT)
    values = set()
    for pattern in range(256):
        v = decode(pattern, t, cfg)
        assert encode(v, t, cfg) == pattern
        values.add(v)
    assert values == set(range(-128, 128))


def test_bijection_exhaustive_qfloat8():
    cfg = TypeConfig(float_total_bits=8, float_frac_bits=3)
    t = RhymeType(Kind.QFLOAT)
    for pattern in range(256):
        assert encode(decode(pattern, t, cfg), t, cfg) == pattern


def test_float_rounding_and_warning():
    warnings = []
    p = encode(3.14159, RhymeType(Kind.QFLOAT), CFG, warn=warnings.append)
    assert decode(p, RhymeType(Kind.QFLOAT), CFG) == pytest.approx(3.14159, abs=2**-9 + 1e-12)
    assert len(warnings) == 1
    # exact grid points encode silently
    warnings.clear()
    encode(2.5, RhymeType(Kind.QFLOAT), CFG, warn=warnings.append)
    assert warnings == []


@given(st.floats(min_value=-100.0, max_value=100.0, allow_nan=False))
def test_float_rounding_idempotent(x):
    t = RhymeType(Kind.QFLOAT)
    p = encode(x, t, CFG)
    assert encode(decode(p, t, CFG), t, CFG) == p


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_qcomplex_pattern_roundtrip(pattern):
    t = RhymeType(Kind.QCOMPLEX)
    assert encode(decode(pattern, t, CFG), t, CFG) == pattern


def test_complex_layout_real_high_imag_low():
    z = complex(0.5, -1.25)
    p = encode(z, RhymeType(Kind.QCOMPLEX), CFG)
    re = p >> 16
    im = p & 0xFFFF
    assert decode(re, RhymeType(Kind.QFLOAT), CFG) == 0.5
    assert decode(im, RhymeType(Kind.QFLOAT), CFG) == -1.25


def test_bit_array_msb_first():
    t = RhymeType(Kind.QBIT_ARRAY, 4)
    assert encode((1, 0, 1, 0), t, CFG) == 0b1010
    assert decode(0b1010, t, CFG) == (1, 0, 1, 0)


def test_ref_encoding():
    assert encode(Address(3), RhymeType(Kind.QREF), CFG) == 3
    assert decode(3, RhymeType(Kind.QREF), CFG) == Address(3)
    with pytest.raises(EncodingError):
        encode(Address(16), RhymeType(Kind.QREF), CFG)


def test_bool_encoding():
    assert encode(True, RhymeType(Kind.QBOOL), CFG) == 1
    assert encode(False, RhymeType(Kind.QBOOL), CFG) == 0
    assert decode(1, RhymeType(Kind.QBOOL), CFG) is True


def test_config_validation():
    with pytest.raises(ValueError):
        TypeConfig(float_total_bits=8, float_frac_bits=8)
    with pytest.raises(ValueError):
        TypeConfig(string_max_len=0)

import pytest
from hypothesis import given
from hypothesis import strategies as st

from grainkit.bits import pack_bits, unpack_hex


def test_single_set_bit_is_lsb_of_first_byte():
    assert pack_bits([1, 0, 0, 0, 0, 0, 0, 0]) == "01"


def test_ninth_bit_lands_in_second_byte():
    assert pack_bits([0] * 8 + [1]) == "0001"


def test_partial_byte_pads_high_bits_with_zero():
    assert pack_bits([1, 1, 1]) == "07"


def test_msb_order():
    assert pack_bits([1, 0, 0, 0, 0, 0, 0, 0], order="msb") == "80"
    assert unpack_hex("80", order="msb")[0] == 1


def test_unpack_rejects_bad_input():
    with pytest.raises(ValueError):
        unpack_hex("zz")
    with pytest.raises(ValueError):
        unpack_hex("0")
    with pytest.raises(ValueError):
        unpack_hex("0001", nbits=24)  # too short
    with pytest.raises(ValueError):
        unpack_hex("07", nbits=2)  # nonzero padding


def test_pack_rejects_non_bits():
    with pytest.raises(ValueError):
        pack_bits([0, 2])
    with pytest.raises(ValueError):
        pack_bits([0], order="middle")


@given(st.lists(st.integers(0, 1), max_size=1024), st.sampled_from(["lsb", "msb"]))
def test_round_trip(bits, order):
    text = pack_bits(bits, order)
    assert len(text) == 2 * ((len(bits) + 7) // 8)
    assert unpack_hex(text, nbits=len(bits), order=order) == tuple(bits)

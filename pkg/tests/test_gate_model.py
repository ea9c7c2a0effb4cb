import pytest

from chacha_ced.gate_model import count, count_classic, count_gbpp


def test_classic_w32():
    t = count_classic(32)
    assert t.total == t.xor2 == 192
    assert list(t.breakdown.values()) == [64, 127, 1]
    assert t.or4 == 0


def test_gbpp_w32():
    t = count_gbpp(32)
    assert t.total == 265
    assert list(t.breakdown.values()) == [124, 124, 12, 4, 1]
    assert (t.xor2, t.or4) == (264, 1)


def test_w4():
    assert count_classic(4).total == 24
    assert count_gbpp(4).total == 41


@pytest.mark.parametrize("w", [2, 4, 8, 16, 32, 64])
def test_affine_and_consistent(w):
    for scheme in ("classic", "gbpp"):
        t = count(scheme, w)
        assert t.total == sum(t.breakdown.values())
        assert count(scheme, w + 1).total - t.total == (6 if scheme == "classic" else 8)
        assert t.to_dict()["total"] == t.total


def test_bad_input():
    with pytest.raises(ValueError):
        count_classic(1)
    with pytest.raises(ValueError):
        count("hamming", 32)

from hypothesis import given
from hypothesis import strategies as st

from dealer_sim.rng import ALGORITHM_ID, Xoshiro256, splitmix64


def test_splitmix64_reference_output():
    _, out = splitmix64(0)
    assert out == 0xE220A8397B1DCDAF


def test_xoshiro_reference_vector():
    # published outputs for state (1, 2, 3, 4)
    g = Xoshiro256(0)
    g._s = [1, 2, 3, 4]
    assert [g.next_u64() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_seeded_stream_is_pinned():
    g = Xoshiro256(0)
    assert g.next_u64() == 0x99EC5F36CB75F2B4
    assert "xoshiro256" in ALGORITHM_ID


@given(st.integers(0, 2**64 - 1))
def test_same_seed_same_stream(seed):
    a, b = Xoshiro256(seed), Xoshiro256(seed)
    assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]


@given(st.integers(0, 2**64 - 1), st.floats(1e-6, 10))
def test_symmetric_is_open_interval(seed, width):
    g = Xoshiro256(seed)
    for _ in range(20):
        x = g.symmetric(width)
        assert -width < x < width

import math

from progeny.rng import Xoshiro256, splitmix64_mix, stream_state


def test_regression_stream():
    # frozen reference draws; any change to seeding or the generator would
    # silently invalidate every recorded experiment
    g = Xoshiro256(42, 0)
    assert [g.next_u64() for _ in range(4)] == [
        0xEF7503780E396791,
        0x96B6362CD297B523,
        0x3C3B122BCC1D3AC6,
        0x5E4E5C192606EF65,
    ]
    assert stream_state(42, 0) == (
        14391204954602457498,
        2107410080952646123,
        12244186810395307756,
        15241335243734635888,
    )


def test_determinism_and_substreams():
    a1 = [Xoshiro256(7, 3).next_u64() for _ in range(100)]
    a2 = [Xoshiro256(7, 3).next_u64() for _ in range(100)]
    b = [Xoshiro256(7, 4).next_u64() for _ in range(100)]
    c = [Xoshiro256(8, 3).next_u64() for _ in range(100)]
    assert a1 == a2
    assert a1 != b
    assert a1 != c


def test_uniform_range_and_moments():
    g = Xoshiro256(1, 0)
    us = [g.uniform() for _ in range(20000)]
    assert all(0.0 <= u < 1.0 for u in us)
    mean = sum(us) / len(us)
    assert abs(mean - 0.5) < 4.0 * math.sqrt(1.0 / 12.0 / len(us))


def test_exponential_positive_finite():
    g = Xoshiro256(1, 1)
    vs = [g.exponential(2.0) for _ in range(1000)]
    assert all(v >= 0.0 and math.isfinite(v) for v in vs)
    mean = sum(vs) / len(vs)
    assert abs(mean - 0.5) < 4.0 * 0.5 / math.sqrt(len(vs))


def test_splitmix_mix_is_bijective_sample():
    outs = {splitmix64_mix(k) for k in range(10000)}
    assert len(outs) == 10000
    assert all(0 <= v < 2**64 for v in outs)

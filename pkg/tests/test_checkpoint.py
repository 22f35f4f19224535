import pytest

from gapsum import checkpoint
from gapsum.errors import CheckpointError
from gapsum.sums import AccumulatorState


def make_state():
    return AccumulatorState(
        next_lo=524291,
        last_prime=524287,
        next_n=43390,
        kahan_s=123.456789e-3,
        kahan_c=-7.8e-18,
        terms=43389,
    )


def test_pack_unpack_round_trip(tmp_path):
    digest = checkpoint.config_digest({"command": "weighted-sum", "alpha": 0.0})
    ck = checkpoint.Checkpoint("prime", 10**8, make_state(), digest)
    path = tmp_path / "run.ckpt"
    checkpoint.save(str(path), ck)
    back = checkpoint.load(str(path))
    assert back == ck  # bit-exact floats included


def test_checksum_detects_corruption(tmp_path):
    digest = checkpoint.config_digest({"a": 1})
    ck = checkpoint.Checkpoint("index", 1000, make_state(), digest)
    raw = bytearray(ck.pack())
    raw[40] ^= 0xFF  # flip a bit inside the accumulator value
    with pytest.raises(CheckpointError):
        checkpoint.unpack(bytes(raw))


def test_wrong_magic_and_length():
    with pytest.raises(CheckpointError):
        checkpoint.unpack(b"nope")
    digest = checkpoint.config_digest({})
    raw = bytearray(checkpoint.Checkpoint("prime", 10, make_state(), digest).pack())
    raw[:4] = b"XXXX"
    import hashlib
    raw[-8:] = hashlib.sha256(bytes(raw[:-8])).digest()[:8]
    with pytest.raises(CheckpointError):
        checkpoint.unpack(bytes(raw))


def test_verify_match_rules():
    digest = checkpoint.config_digest({"alpha": 0.0})
    other = checkpoint.config_digest({"alpha": 1.0})
    ck = checkpoint.Checkpoint("prime", 10**6, make_state(), digest)
    checkpoint.verify_match(ck, "prime", 10**6, digest)
    with pytest.raises(CheckpointError):
        checkpoint.verify_match(ck, "index", 10**6, digest)
    with pytest.raises(CheckpointError):
        checkpoint.verify_match(ck, "prime", 10**7, digest)
    with pytest.raises(CheckpointError):
        checkpoint.verify_match(ck, "prime", 10**6, other)


def test_missing_file():
    with pytest.raises(CheckpointError):
        checkpoint.load("/nonexistent/run.ckpt")

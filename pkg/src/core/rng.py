import struct

import numpy as np
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

STREAM_ID_SIZE = 8
MASK_64 = (1 << 64) - 1
HKDF_INFO = b"mimo-hwi-stream"


def derive_stream_id(parent: int, *labels: int | str) -> int:
    """Derive a 64-bit stream id from a parent id and a path of labels.

    Integer labels are packed as unsigned 64-bit words, string labels as
    their UTF-8 bytes, each prefixed with a tag so that (1, "a") and
    ("1a",) never collide.
    """
    material = bytearray(struct.pack("!Q", parent & MASK_64))
    for label in labels:
        if isinstance(label, str):
            raw = label.encode("utf-8")
            material += b"s" + struct.pack("!I", len(raw)) + raw
        else:
            material += b"i" + struct.pack("!Q", int(label) & MASK_64)
    digest = HKDF(
        algorithm=hashes.SHA256(), length=STREAM_ID_SIZE, salt=None, info=HKDF_INFO
    ).derive(bytes(material))
    return int.from_bytes(digest, "big")


class RngStream:
    """Seeded, single-owner random stream.

    Draws come from a Philox counter-based generator keyed by
    (seed, stream_id); equal keys give equal sequences.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & MASK_64
        self.stream_id = int(stream_id) & MASK_64
        key = (self.seed << 64) | self.stream_id
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def spawn(self, *labels: int | str) -> "RngStream":
        return RngStream(self.seed, derive_stream_id(self.stream_id, *labels))

    def standard_normal(self, shape) -> np.ndarray:
        return self.generator.standard_normal(shape)

    def integers(self, low: int, high: int, size=None) -> np.ndarray:
        return self.generator.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id:#018x})"

"""
Bit-level plumbing shared by the encoders.

Bits are packed most-significant-first within each byte and the final byte is
zero padded; BitStream.length_bits keeps the exact count. Varints are LEB128:
seven value bits per group, least significant group first, high bit set on all
groups but the last.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

try:
    from .errors import EncodingError, MalformedStreamError
except ImportError:
    from errors import EncodingError, MalformedStreamError


@dataclass(frozen=True)
class BitStream:
    data: bytes
    length_bits: int

    def __post_init__(self):
        if self.length_bits > 8 * len(self.data) or self.length_bits < 0:
            raise MalformedStreamError(
                f'{self.length_bits} bits do not fit in {len(self.data)} bytes'
            )

    def __len__(self):
        return self.length_bits

    @property
    def bits(self) -> str:
        """The stream as a '0'/'1' string (for tests and dumps)."""
        unpacked = np.unpackbits(np.frombuffer(self.data, dtype=np.uint8), bitorder='big')
        return ''.join(map(str, unpacked[:self.length_bits].tolist()))

    @classmethod
    def from_bits(cls, bits: str) -> 'BitStream':
        writer = BitWriter()
        writer.write_bits(bits)
        return writer.to_stream()


class BitWriter:
    """Append-only bit buffer; single owner while encoding."""

    def __init__(self):
        self._bits: List[int] = []

    def __len__(self):
        return len(self._bits)

    def write(self, value: int, width: int) -> None:
        if width == 0:
            if value != 0:
                raise EncodingError(f'value {value} does not fit in 0 bits')
            return
        if value < 0 or value >> width:
            raise EncodingError(f'value {value} does not fit in {width} bits')
        self._bits.extend(map(int, format(value, f'0{width}b')))

    def write_bits(self, bits: str) -> None:
        self._bits.extend(1 if b == '1' else 0 for b in bits)

    def write_unary(self, value: int) -> None:
        """value >= 1 as (value - 1) zeros and a closing one."""
        if value < 1:
            raise EncodingError(f'unary code needs a positive value, got {value}')
        self._bits.extend([0] * (value - 1))
        self._bits.append(1)

    def write_varint(self, value: int) -> None:
        for byte in encode_varint(value):
            self.write(byte, 8)

    def to_stream(self) -> BitStream:
        packed = np.packbits(np.array(self._bits, dtype=np.uint8), bitorder='big')
        return BitStream(packed.tobytes(), len(self._bits))


class BitReader:
    def __init__(self, stream: BitStream):
        unpacked = np.unpackbits(np.frombuffer(stream.data, dtype=np.uint8), bitorder='big')
        self._bits = unpacked[:stream.length_bits].tolist()
        self.position = 0

    @property
    def remaining(self) -> int:
        return len(self._bits) - self.position

    def read_bit(self) -> int:
        if self.position >= len(self._bits):
            raise MalformedStreamError(f'stream truncated at bit {self.position}')
        bit = self._bits[self.position]
        self.position += 1
        return bit

    def read(self, width: int) -> int:
        if width > self.remaining:
            raise MalformedStreamError(
                f'need {width} bits at {self.position}, only {self.remaining} left'
            )
        value = 0
        for bit in self._bits[self.position:self.position + width]:
            value = (value << 1) | bit
        self.position += width
        return value

    def read_unary(self, cap: int) -> int:
        value = 1
        while self.read_bit() == 0:
            value += 1
            if value > cap:
                raise MalformedStreamError(f'unary value exceeds cap {cap}')
        return value

    def read_varint(self) -> int:
        value = 0
        shift = 0
        while True:
            byte = self.read(8)
            value |= (byte & 0x7F) << shift
            shift += 7
            if not byte & 0x80:
                return value


def encode_varint(value: int) -> bytes:
    if value < 0:
        raise EncodingError(f'varint needs a non-negative value, got {value}')
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varint(buffer: bytes, position: int) -> Tuple[int, int]:
    """Read one varint at position; returns (value, next position)."""
    value = 0
    shift = 0
    while True:
        if position >= len(buffer):
            raise MalformedStreamError('varint runs past end of buffer')
        byte = buffer[position]
        position += 1
        value |= (byte & 0x7F) << shift
        shift += 7
        if not byte & 0x80:
            return value, position

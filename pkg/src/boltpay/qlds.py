"""One-time signatures whose signing key is a bundle of 2n bolts.

The key holds two bolts per message bit.  Signing hashes the message to n
bits and destructively measures one bolt per bit (the i-th bolt for a zero
bit, the (n+i)-th for a one bit); the released preimages are the signature.
Verification is stateless hash comparison, so a smart contract can check a
signature without touching the environment.

Holding the key proves nothing was signed yet: verification checks all 2n
bolts are alive, and every signature kills n of them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import KeyExhausted, ParseError
from .lightning import (
    PREIMAGE_LEN,
    SERIAL_LEN,
    BoltHandle,
    QuantumEnv,
    verify_certificate,
)

# A signature is the concatenation of n 16-byte certificates.
QldsSignature = bytes

DEFAULT_N = 256


@dataclass(frozen=True)
class QldsParams:
    """n = number of message-hash bits = half the bolt count per key."""

    n: int = DEFAULT_N

    def __post_init__(self):
        if not 1 <= self.n <= 256:
            raise ParseError(f"n must be in 1..256, got {self.n}")


@dataclass(frozen=True)
class QldsKey:
    """2n bolts in fixed order plus their concatenated serial."""

    bolts: tuple[BoltHandle, ...]
    serial: bytes

    @property
    def n(self) -> int:
        return len(self.bolts) // 2


def message_bits(message: bytes, n: int) -> tuple[int, ...]:
    """First n bits of SHA-256(message), most significant bit first."""
    digest = hashlib.sha256(message).digest()
    return tuple((digest[i // 8] >> (7 - i % 8)) & 1 for i in range(n))


def signing_indices(bits: tuple[int, ...]) -> tuple[int, ...]:
    """0-based key positions consumed for a given bit string.

    Bit j selects position j for a zero and n+j for a one (the classic
    two-column layout, columns of width n).
    """
    n = len(bits)
    return tuple(b * n + j for j, b in enumerate(bits))


def qlds_gen(env: QuantumEnv, params: QldsParams, owner: str) -> QldsKey:
    """Mint a fresh 2n-bolt key for ``owner``."""
    bolts = tuple(env.gen_bolt(owner) for _ in range(2 * params.n))
    serial = b"".join(h.serial for h in bolts)
    return QldsKey(bolts, serial)


def split_serial(serial: bytes) -> list[bytes]:
    if not serial or len(serial) % SERIAL_LEN != 0:
        raise ParseError("serial length must be a positive multiple of 32")
    return [serial[i:i + SERIAL_LEN] for i in range(0, len(serial), SERIAL_LEN)]


def qlds_ver(env: QuantumEnv, key: QldsKey, serial: bytes) -> bool:
    """Check the key is whole: every component verifies against its segment.

    Rejects as soon as any bolt was consumed, which is what makes the key
    one-time: a signed-with key can no longer be passed off as money.
    """
    segments = split_serial(serial)
    if len(segments) != len(key.bolts) or len(segments) % 2 != 0:
        return False
    return all(env.verify_bolt(h, s) for h, s in zip(key.bolts, segments))


def gen_sig(env: QuantumEnv, key: QldsKey, serial: bytes, message: bytes) -> QldsSignature:
    """Sign by measuring one bolt per message bit; consumes those bolts.

    Consumption is in ascending bit position and sticks: if a needed bolt is
    already dead the call fails with KeyExhausted, and everything measured
    before the failure stays measured.
    """
    if serial != key.serial:
        raise ParseError("serial does not match key")
    n = key.n
    if n == 0 or len(key.bolts) != 2 * n:
        raise ParseError("key must hold 2n bolts")
    bits = message_bits(message, n)
    certs = []
    for j, idx in enumerate(signing_indices(bits)):
        bolt = key.bolts[idx]
        if not env.is_alive(bolt):
            raise KeyExhausted(f"component {idx + 1} already consumed (bit {j + 1})")
        certs.append(env.gen_certificate(bolt, bolt.serial))
    return b"".join(certs)


def verify_sig(serial: bytes, message: bytes, signature: QldsSignature) -> bool:
    """Stateless signature check against the concatenated serial.

    Works from the serial alone: n is inferred from its length, and each
    certificate must open the segment its message bit selects.
    """
    try:
        segments = split_serial(serial)
    except ParseError:
        return False
    if len(segments) % 2 != 0:
        return False
    n = len(segments) // 2
    if n == 0 or len(signature) != n * PREIMAGE_LEN:
        return False
    bits = message_bits(message, n)
    for j, idx in enumerate(signing_indices(bits)):
        cert = signature[j * PREIMAGE_LEN:(j + 1) * PREIMAGE_LEN]
        if not verify_certificate(segments[idx], cert):
            return False
    return True

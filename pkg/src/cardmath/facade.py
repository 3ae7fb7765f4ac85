"""Simulated restricted platform API of a cryptographic smartcard.

This is the trusted "hardware" layer: the only source of wide arithmetic
and elliptic-curve acceleration available to the derivation layers.
Internally it computes with ordinary Python integers (standing in for
the coprocessor); externally it exposes exactly the narrow operations a
card would, meters every call in a :class:`CallLedger`, and enforces
card-style operand restrictions.

One facade instance models one card: single-threaded, independent of
any other instance, no global state.
"""

from __future__ import annotations

import hashlib
import math
import random
import secrets
import weakref
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .bignum import BigNum
from .errors import (
    InfinityResult,
    InvalidCurve,
    InvalidKey,
    MalformedSignature,
    OperandTooLarge,
    PointNotOnCurve,
    ScalarOutOfRange,
    ZeroModulus,
)

if TYPE_CHECKING:  # pragma: no cover
    from .ec import EcCurve, EcPoint

# 521-bit curve support plus headroom for the doubled-width product trick.
DEFAULT_MAX_OPERAND_BITS = 576
DEFAULT_TRANSIENT_BYTES = 2048
DEFAULT_PERSISTENT_BYTES = 65536


class DhMode(Enum):
    """Key-agreement output shape: x-coordinate only, or both coordinates."""

    X_ONLY = "x_only"
    XY = "xy"


@dataclass
class CallLedger:
    """Monotonic per-operation call counters (reset only on request)."""

    modpow_calls: int = 0
    keygen_calls: int = 0
    dh_calls: int = 0
    sign_calls: int = 0
    verify_calls: int = 0
    rng_calls: int = 0

    _FIELDS = ("modpow_calls", "keygen_calls", "dh_calls",
               "sign_calls", "verify_calls", "rng_calls")

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self._FIELDS}

    def snapshot(self) -> "CallLedger":
        return CallLedger(**self.as_dict())

    def delta(self, since: "CallLedger") -> dict:
        """Per-counter difference relative to an earlier snapshot."""
        return {name: getattr(self, name) - getattr(since, name) for name in self._FIELDS}

    def reset(self) -> None:
        for name in self._FIELDS:
            setattr(self, name, 0)


@dataclass
class DhOutput:
    """Result of a key-agreement call; `y` is None in X_ONLY mode."""

    x: BigNum
    y: Optional[BigNum] = None


@dataclass
class EcKeyPair:
    """Key record as stored on the card.

    The embedded curve's generator is caller-settable (see
    ``EcCurve.with_generator``): loading an arbitrary point as the domain
    generator is what lets ECDSA disambiguate a scalar product.  For such
    hand-built signing records ``public_point`` may be None; the card
    never checks the pair for consistency.
    """

    private_scalar: BigNum
    public_point: Optional["EcPoint"]
    curve: "EcCurve"


@dataclass(frozen=True)
class EcdsaSignature:
    r: BigNum
    s: BigNum


def _probable_prime(n: int) -> bool:
    """Miller-Rabin on fixed bases; good enough for parameter validation."""
    if n < 2:
        return False
    for sp in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


class CardFacade:
    """One simulated card: metered crypto engines plus two memory segments."""

    def __init__(
        self,
        *,
        transient_capacity: int = DEFAULT_TRANSIENT_BYTES,
        persistent_capacity: int = DEFAULT_PERSISTENT_BYTES,
        dh_mode: DhMode = DhMode.X_ONLY,
        rng_seed: Optional[int] = None,
        max_operand_bits: int = DEFAULT_MAX_OPERAND_BITS,
    ):
        self.transient_capacity = transient_capacity
        self.persistent_capacity = persistent_capacity
        self.dh_mode = dh_mode
        self.rng_seed = rng_seed
        self.max_operand_bits = max_operand_bits
        self.ledger = CallLedger()
        self._rng = random.Random(rng_seed) if rng_seed is not None else None
        self._pending_modpow_faults = 0
        self._validated_curves: "weakref.WeakSet" = weakref.WeakSet()

    @classmethod
    def from_mapping(cls, mapping: dict) -> "CardFacade":
        """Build from a flat configuration record (unknown keys rejected)."""
        known = {"transient_capacity", "persistent_capacity", "dh_mode",
                 "rng_seed", "max_operand_bits"}
        bad = set(mapping) - known
        if bad:
            raise ValueError(f"unknown facade settings: {sorted(bad)}")
        kwargs = dict(mapping)
        if isinstance(kwargs.get("dh_mode"), str):
            kwargs["dh_mode"] = DhMode(kwargs["dh_mode"].lower())
        return cls(**kwargs)

    def reset_ledger(self) -> None:
        self.ledger.reset()

    # -- test hook ---------------------------------------------------------

    def inject_modpow_fault(self, calls: int = 1) -> None:
        """Corrupt the next `calls` modpow results (flips the low bit).

        Test hook used to prove that the self-test suite is not vacuous.
        """
        self._pending_modpow_faults = calls

    # -- entropy -------------------------------------------------------------

    def _rand_below(self, bound: int) -> int:
        if self._rng is not None:
            return self._rng.randrange(bound)
        return secrets.randbelow(bound)

    def random_bytes(self, count: int) -> bytes:
        """`count` bytes from the seeded generator or OS entropy."""
        if count < 0:
            raise ValueError("count must be >= 0")
        data = self._rng.randbytes(count) if self._rng is not None else secrets.token_bytes(count)
        self.ledger.rng_calls += 1
        return data

    # -- raw modular exponentiation (the RSA-style tunnel) ---------------------

    def modpow(self, base: BigNum, exponent: BigNum, modulus: BigNum) -> BigNum:
        """base^exponent mod modulus on the coprocessor.

        Any modulus >= 2 is accepted, even ones: broader than a real RSA
        engine, and deliberately so (plain products are derived through a
        power-of-two modulus).  The caller must reduce the base first.
        """
        m = modulus.to_int()
        if m < 2:
            raise ZeroModulus("modulus must be >= 2")
        b = base.to_int()
        e = exponent.to_int()
        if b >= m:
            raise OperandTooLarge("base must be reduced below the modulus")
        for value, name in ((b, "base"), (e, "exponent"), (m, "modulus")):
            if value.bit_length() > self.max_operand_bits:
                raise OperandTooLarge(f"{name} is wider than {self.max_operand_bits} bits")
        result = pow(b, e, m)
        if self._pending_modpow_faults > 0:
            self._pending_modpow_faults -= 1
            result ^= 1
        self.ledger.modpow_calls += 1
        return BigNum.from_int(result, modulus.capacity)

    # -- elliptic-curve engines ----------------------------------------------

    def generate_keypair(self, curve: "EcCurve") -> "EcKeyPair":
        """Fresh key pair over validated domain parameters."""
        self._validate_curve(curve)
        from .ec import EcPoint

        n = curve.n.to_int()
        d = 1 + self._rand_below(n - 1)
        gx, gy = curve.G.x.to_int(), curve.G.y.to_int()
        pub = self._ec_mul(d, (gx, gy), curve)
        if pub is None:  # unreachable for a valid generator of order n
            raise InfinityResult("generator order divides the drawn scalar")
        cap = curve.p.capacity
        point = EcPoint(curve, BigNum.from_int(pub[0], cap), BigNum.from_int(pub[1], cap))
        self.ledger.keygen_calls += 1
        return EcKeyPair(
            private_scalar=BigNum.from_int(d, curve.n.capacity),
            public_point=point,
            curve=curve,
        )

    def ecdh_plain(self, private_scalar: BigNum, peer_point: "EcPoint", curve: "EcCurve") -> DhOutput:
        """Scalar times peer point; output shape follows the facade's dh_mode."""
        n = curve.n.to_int()
        s = private_scalar.to_int()
        if not 1 <= s < n:
            raise ScalarOutOfRange(f"scalar must lie in [1, {n - 1}]")
        self._require_on_curve(peer_point, curve)
        result = self._ec_mul(s, (peer_point.x.to_int(), peer_point.y.to_int()), curve)
        if result is None:
            raise InfinityResult("agreed point is the point at infinity")
        self.ledger.dh_calls += 1
        cap = curve.p.capacity
        if self.dh_mode is DhMode.XY:
            return DhOutput(BigNum.from_int(result[0], cap), BigNum.from_int(result[1], cap))
        return DhOutput(BigNum.from_int(result[0], cap))

    def ecdsa_sign(self, key: EcKeyPair, message: bytes) -> EcdsaSignature:
        """ECDSA over the key record's curve (whose generator may be repointed)."""
        curve = key.curve
        n = curve.n.to_int()
        d = key.private_scalar.to_int()
        if not 1 <= d < n:
            raise InvalidKey("private scalar outside [1, n-1]")
        self._require_on_curve(curve.G, curve, error=InvalidKey)
        g = (curve.G.x.to_int(), curve.G.y.to_int())
        z = self._digest(message, n)
        counter = 0
        while True:
            k = self._nonce(d, message, n, counter)
            counter += 1
            point = self._ec_mul(k, g, curve)
            if point is None:
                continue
            r = point[0] % n
            if r == 0:
                continue
            s = (pow(k, -1, n) * (z + r * d)) % n
            if s == 0:
                continue
            break
        self.ledger.sign_calls += 1
        cap = curve.n.capacity
        return EcdsaSignature(BigNum.from_int(r, cap), BigNum.from_int(s, cap))

    def ecdsa_verify(self, public: "EcPoint", curve: "EcCurve", message: bytes,
                     sig: EcdsaSignature) -> bool:
        """Standard ECDSA verification against the record's generator."""
        if not isinstance(sig.r, BigNum) or not isinstance(sig.s, BigNum):
            raise MalformedSignature("signature fields must be BigNum values")
        self._require_on_curve(public, curve, error=InvalidKey)
        n = curve.n.to_int()
        r = sig.r.to_int()
        s = sig.s.to_int()
        self.ledger.verify_calls += 1
        if not (1 <= r < n and 1 <= s < n):
            return False
        z = self._digest(message, n)
        w = pow(s, -1, n)
        g = (curve.G.x.to_int(), curve.G.y.to_int())
        q = (public.x.to_int(), public.y.to_int())
        point = self._ec_add(
            self._ec_mul((z * w) % n, g, curve),
            self._ec_mul((r * w) % n, q, curve),
            curve,
        )
        if point is None:
            return False
        return point[0] % n == r

    # -- trusted internal integer arithmetic -----------------------------------

    @staticmethod
    def _digest(message: bytes, n: int) -> int:
        h = hashlib.sha256(message).digest()
        z = int.from_bytes(h, "big")
        excess = 256 - n.bit_length()
        if excess > 0:
            z >>= excess
        return z % n

    def _nonce(self, d: int, message: bytes, n: int, counter: int) -> int:
        """Deterministic when the facade is seeded, random otherwise."""
        if self._rng is None:
            return 1 + secrets.randbelow(n - 1)
        material = b"|".join([
            str(self.rng_seed).encode(),
            d.to_bytes((d.bit_length() + 7) // 8 or 1, "big"),
            n.to_bytes((n.bit_length() + 7) // 8, "big"),
            message,
            counter.to_bytes(4, "big"),
        ])
        k = int.from_bytes(hashlib.sha256(material).digest(), "big")
        return 1 + k % (n - 1)

    def _require_on_curve(self, point: "EcPoint", curve: "EcCurve", error=PointNotOnCurve) -> None:
        if point is None or point.is_infinity:
            raise error("point at infinity is not usable here")
        p = curve.p.to_int()
        x, y = point.x.to_int(), point.y.to_int()
        a, b = curve.a.to_int(), curve.b.to_int()
        if x >= p or y >= p or (y * y - (x * x * x + a * x + b)) % p != 0:
            raise error("point does not satisfy the curve equation")

    def _ec_add(self, P, Q, curve: "EcCurve"):
        p = curve.p.to_int()
        if P is None:
            return Q
        if Q is None:
            return P
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2 and (y1 + y2) % p == 0:
            return None
        if P == Q:
            lam = (3 * x1 * x1 + curve.a.to_int()) * pow(2 * y1 % p, -1, p) % p
        else:
            lam = (y2 - y1) * pow((x2 - x1) % p, -1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        return (x3, (lam * (x1 - x3) - y1) % p)

    def _ec_mul(self, k: int, P, curve: "EcCurve"):
        acc = None
        addend = P
        while k:
            if k & 1:
                acc = self._ec_add(acc, addend, curve)
            addend = self._ec_add(addend, addend, curve)
            k >>= 1
        return acc

    def _validate_curve(self, curve: "EcCurve") -> None:
        """Full domain-parameter check; memoized per curve instance."""
        if curve in self._validated_curves:
            return
        p = curve.p.to_int()
        a, b = curve.a.to_int(), curve.b.to_int()
        n, h = curve.n.to_int(), curve.h
        if p < 3 or not _probable_prime(p):
            raise InvalidCurve("field prime fails the primality check")
        if a >= p or b >= p:
            raise InvalidCurve("coefficients must be reduced mod p")
        if (4 * a * a * a + 27 * b * b) % p == 0:
            raise InvalidCurve("zero discriminant")
        if curve.G.is_infinity:
            raise InvalidCurve("generator must be a finite point")
        self._require_on_curve(curve.G, curve, error=InvalidCurve)
        if n < 2 or not _probable_prime(n):
            raise InvalidCurve("group order fails the primality check")
        if h < 1:
            raise InvalidCurve("cofactor must be at least 1")
        if (h * n - (p + 1)) ** 2 > 4 * p:
            raise InvalidCurve("group size violates the Hasse bound")
        g = (curve.G.x.to_int(), curve.G.y.to_int())
        if self._ec_mul(n, g, curve) is not None:
            raise InvalidCurve("generator order is not n")
        self._validated_curves.add(curve)

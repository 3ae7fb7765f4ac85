"""Affine short-Weierstrass curves and points derived from the card facade.

Point addition is textbook chord-and-tangent with every wide operation
routed through the bignum layer, so only modpow calls show up in the
ledger.  Scalar multiplication is offloaded to the card's key-agreement
engine; when the card returns only the x-coordinate, the missing y is
recovered by solving the curve equation and the right candidate is
selected with one ECDSA signature (under a key record whose generator is
repointed at the input point) plus up to two verifications.

Only affine coordinates and Weierstrass form are supported; the point at
infinity is an explicit variant of :class:`EcPoint`, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

from . import bignum
from .bignum import BigNum, ModContext, compare
from .errors import (
    CardMathError,
    CurveMismatch,
    NonResidue,
    NotOnCurve,
    PointNotOnCurve,
    ScalarOutOfRange,
)
from .facade import CardFacade, DhMode, EcKeyPair

_TWO = BigNum.from_int(2)
_THREE = BigNum.from_int(3)

# The card only proves which y-candidate is right, so any fixed plaintext works.
DISAMBIGUATION_MESSAGE = b"cardmath:candidate-check"


class EcPoint:
    """A curve point: either affine coordinates or the point at infinity.

    The constructor checks only that coordinates are reduced; membership
    on the curve is the producer's job (see :func:`is_on_curve`).
    """

    __slots__ = ("curve", "x", "y")

    def __init__(self, curve: "EcCurve", x: Optional[BigNum], y: Optional[BigNum]):
        if (x is None) != (y is None):
            raise ValueError("both coordinates or neither")
        if x is not None:
            if compare(x, curve.p) >= 0 or compare(y, curve.p) >= 0:
                raise ValueError("coordinates must be reduced mod p")
        self.curve = curve
        self.x = x
        self.y = y

    @classmethod
    def infinity(cls, curve: "EcCurve") -> "EcPoint":
        return cls(curve, None, None)

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __eq__(self, other) -> bool:
        if not isinstance(other, EcPoint):
            return NotImplemented
        if not self.curve.same_params(other.curve):
            return False
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return compare(self.x, other.x) == 0 and compare(self.y, other.y) == 0

    def __hash__(self) -> int:
        if self.is_infinity:
            return hash(("ec-inf",))
        return hash((self.x.to_int(), self.y.to_int()))

    def __repr__(self) -> str:
        if self.is_infinity:
            return "EcPoint(INFINITY)"
        return f"EcPoint(x=0x{self.x.to_hex()}, y=0x{self.y.to_hex()})"


@dataclass(frozen=True)
class CurveParams:
    """Plain-integer parameter set for a named curve."""

    name: str
    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    h: int


SECP256R1 = CurveParams(
    name="secp256r1",
    p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
    h=1,
)

SECP256K1 = CurveParams(
    name="secp256k1",
    p=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F,
    a=0,
    b=7,
    gx=0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    gy=0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
    n=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141,
    h=1,
)

# y^2 = x^3 + x + 1 over F_23: 28 points, G = (5, 4) generates the order-7 subgroup.
TINY_CURVE = CurveParams(name="tiny23", p=23, a=1, b=1, gx=5, gy=4, n=7, h=4)

NAMED_CURVES = {c.name: c for c in (SECP256R1, SECP256K1, TINY_CURVE)}


def _round_capacity(bits: int) -> int:
    return max(bignum.LIMB_BITS, bignum._limbs_for(bits) * bignum.LIMB_BITS)


class EcCurve:
    """Domain parameters bound to a facade; validated at construction."""

    def __init__(self, facade: CardFacade, *, p, a, b, gx, gy, n, h: int = 1,
                 name: str = "", _validate: bool = True):
        cap = _round_capacity(p.bit_length() if isinstance(p, int) else p.bit_length())
        self.p = self._coerce(p, cap)
        self.a = self._coerce(a, cap)
        self.b = self._coerce(b, cap)
        n_int = n if isinstance(n, int) else n.to_int()
        self.n = self._coerce(n, _round_capacity(n_int.bit_length()))
        self.h = h
        self.name = name
        self.facade = facade
        self.ctx = ModContext(self.p, facade, is_prime=True)
        self.G = EcPoint(self, self._coerce(gx, cap), self._coerce(gy, cap))
        if _validate:
            facade.validate_curve(self)

    @staticmethod
    def _coerce(value, cap: int) -> BigNum:
        if isinstance(value, BigNum):
            return value.with_capacity(cap)
        return BigNum.from_int(value, cap)

    @classmethod
    def from_params(cls, params: CurveParams, facade: CardFacade) -> "EcCurve":
        return cls(facade, p=params.p, a=params.a, b=params.b, gx=params.gx,
                   gy=params.gy, n=params.n, h=params.h, name=params.name)

    @classmethod
    def from_name(cls, name: str, facade: CardFacade) -> "EcCurve":
        if name not in NAMED_CURVES:
            raise KeyError(f"unknown curve {name!r}; have {sorted(NAMED_CURVES)}")
        return cls.from_params(NAMED_CURVES[name], facade)

    def with_generator(self, point: EcPoint) -> "EcCurve":
        """Copy of the domain with the generator repointed at `point`.

        The card checks only that the point is on the curve; its order is
        deliberately left unchecked.  This models loading an arbitrary
        point as the domain generator of a key object so the signing
        engine effectively works over that point.
        """
        self.facade._require_on_curve(point, self)
        clone = EcCurve(self.facade, p=self.p, a=self.a, b=self.b,
                        gx=point.x, gy=point.y, n=self.n, h=self.h,
                        name=self.name, _validate=False)
        return clone

    def same_params(self, other: "EcCurve") -> bool:
        if self is other:
            return True
        return (compare(self.p, other.p) == 0 and compare(self.a, other.a) == 0
                and compare(self.b, other.b) == 0)

    def field_bytes(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def __repr__(self) -> str:
        label = self.name or f"p=0x{self.p.to_hex()}"
        return f"EcCurve({label})"


# -- derived operations ---------------------------------------------------------

def _rhs(curve: EcCurve, x: BigNum) -> BigNum:
    """x^3 + a*x + b mod p through the derived operations."""
    ctx = curve.ctx
    cube = bignum.mod_exp(x, _THREE, ctx)
    ax = bignum.mod_mult(curve.a, x, ctx)
    return bignum.mod_add(bignum.mod_add(cube, ax, ctx), curve.b, ctx)


def is_on_curve(point: EcPoint) -> bool:
    """True for infinity or any (x, y) satisfying the curve equation."""
    if point.is_infinity:
        return True
    lhs = bignum.mod_exp(point.y, _TWO, point.curve.ctx)
    return compare(lhs, _rhs(point.curve, point.x)) == 0


def point_random(curve: EcCurve) -> EcPoint:
    """Random on-curve point from the card's key generator (one keygen call)."""
    return curve.facade.generate_keypair(curve).public_point


def point_negate(point: EcPoint) -> EcPoint:
    """(x, -y); no facade calls."""
    if point.is_infinity:
        return point
    return EcPoint(point.curve, point.x, bignum.mod_negate(point.y, point.curve.ctx))


# Trap ids fired by point_add / scalar_mult when a profiling context is passed.
TRACE_STEPS_POINT_ADD = ((10, "slope"), (20, "x_out"), (30, "y_out"))
TRACE_STEPS_SCALAR_MULT = {
    DhMode.X_ONLY: ((10, "validate"), (20, "ecdh"), (30, "solve_y"),
                    (40, "sign"), (50, "select")),
    DhMode.XY: ((10, "validate"), (20, "ecdh"), (60, "assemble")),
}


def point_add(P: EcPoint, Q: EcPoint, *, trace=None) -> EcPoint:
    """Chord-and-tangent addition; handles doubling and the identity."""
    if not P.curve.same_params(Q.curve):
        raise CurveMismatch("points live on different curves")
    curve = P.curve
    ctx = curve.ctx
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    if compare(P.x, Q.x) == 0:
        if compare(Q.y, bignum.mod_negate(P.y, ctx)) == 0:
            # covers P + (-P) and doubling a y = 0 point
            return EcPoint.infinity(curve)
        # tangent slope (3*x^2 + a) / (2*y)
        sq = bignum.mod_exp(P.x, _TWO, ctx)
        num = bignum.mod_add(bignum.mod_add(sq, sq, ctx), sq, ctx)
        num = bignum.mod_add(num, curve.a, ctx)
        den = bignum.mod_add(P.y, P.y, ctx)
    else:
        num = bignum.mod_sub(Q.y, P.y, ctx)
        den = bignum.mod_sub(Q.x, P.x, ctx)
    lam = bignum.mod_mult(num, bignum.mod_inv(den, ctx), ctx)
    if trace is not None:
        trace.trap(10)
    x3 = bignum.mod_sub(bignum.mod_sub(bignum.mod_exp(lam, _TWO, ctx), P.x, ctx), Q.x, ctx)
    if trace is not None:
        trace.trap(20)
    y3 = bignum.mod_sub(bignum.mod_mult(lam, bignum.mod_sub(P.x, x3, ctx), ctx), P.y, ctx)
    if trace is not None:
        trace.trap(30)
    return EcPoint(curve, x3, y3)


def scalar_mult(s: BigNum, P: EcPoint, *, trace=None) -> EcPoint:
    """s * P through the card's key-agreement engine.

    X_ONLY pipeline: one DH call gives x, the curve equation gives the two
    y candidates, and an ECDSA sign/verify round under a generator
    repointed at P picks the right one.  XY pipeline: a single DH call.
    """
    curve = P.curve
    facade = curve.facade
    if P.is_infinity:
        raise PointNotOnCurve("cannot multiply the point at infinity")
    if s.is_zero() or compare(s, curve.n) >= 0:
        raise ScalarOutOfRange("scalar must lie in [1, n-1]")
    if trace is not None:
        trace.trap(10)

    agreed = facade.ecdh_plain(s, P, curve)
    if trace is not None:
        trace.trap(20)

    if facade.dh_mode is DhMode.XY:
        result = EcPoint(curve, agreed.x, agreed.y)
        if trace is not None:
            trace.trap(60)
        return result

    x = agreed.x
    y = bignum.mod_sqrt(_rhs(curve, x), curve.ctx)
    y_hat = bignum.mod_negate(y, curve.ctx)
    if trace is not None:
        trace.trap(30)

    if compare(y, y_hat) == 0:  # y = 0: both candidates coincide
        result = EcPoint(curve, x, y)
        if trace is not None:
            trace.trap(50)
        return result

    signing_domain = curve.with_generator(P)
    key = EcKeyPair(private_scalar=s, public_point=None, curve=signing_domain)
    sig = facade.ecdsa_sign(key, DISAMBIGUATION_MESSAGE)
    if trace is not None:
        trace.trap(40)

    candidate_a = EcPoint(curve, x, y)
    candidate_b = EcPoint(curve, x, y_hat)
    if facade.ecdsa_verify(candidate_a, signing_domain, DISAMBIGUATION_MESSAGE, sig):
        result = candidate_a
    elif facade.ecdsa_verify(candidate_b, signing_domain, DISAMBIGUATION_MESSAGE, sig):
        result = candidate_b
    else:
        raise CardMathError("neither y candidate verified; inconsistent card state")
    if trace is not None:
        trace.trap(50)
    return result


def recover_y(x: BigNum, curve: EcCurve, parity_hint: Optional[int] = None
              ) -> Tuple[BigNum, BigNum]:
    """Both roots (y, p-y) of the curve equation at x.

    With a parity hint the matching root comes first (this is how
    compressed points are decoded).  Raises NotOnCurve when x is not the
    x-coordinate of any point.
    """
    if compare(x, curve.p) >= 0:
        raise ValueError("x must be reduced mod p")
    try:
        y = bignum.mod_sqrt(_rhs(curve, x), curve.ctx)
    except NonResidue as exc:
        raise NotOnCurve(f"no point with x = 0x{x.to_hex()}") from exc
    y_hat = bignum.mod_negate(y, curve.ctx)
    if parity_hint is not None and y.is_odd() != bool(parity_hint & 1):
        y, y_hat = y_hat, y
    return y, y_hat


# -- octet serialization ----------------------------------------------------------

def encode_point(point: EcPoint, compressed: bool = False) -> bytes:
    """SEC-style octets: 04||x||y, 02/03||x, or the single byte 00 for infinity."""
    if point.is_infinity:
        return b"\x00"
    width = point.curve.field_bytes()
    xb = point.x.to_bytes(width)
    if compressed:
        prefix = b"\x03" if point.y.is_odd() else b"\x02"
        return prefix + xb
    return b"\x04" + xb + point.y.to_bytes(width)


def decode_point(data: bytes, curve: EcCurve) -> EcPoint:
    """Inverse of :func:`encode_point`; compressed input recovers y by parity."""
    if data == b"\x00":
        return EcPoint.infinity(curve)
    if not data:
        raise ValueError("empty point encoding")
    width = curve.field_bytes()
    kind = data[0]
    if kind == 0x04:
        if len(data) != 1 + 2 * width:
            raise ValueError("bad uncompressed point length")
        cap = curve.p.capacity
        point = EcPoint(curve,
                        BigNum.from_bytes(data[1:1 + width], cap),
                        BigNum.from_bytes(data[1 + width:], cap))
        if not is_on_curve(point):
            raise PointNotOnCurve("decoded point fails the curve equation")
        return point
    if kind in (0x02, 0x03):
        if len(data) != 1 + width:
            raise ValueError("bad compressed point length")
        x = BigNum.from_bytes(data[1:], curve.p.capacity)
        if compare(x, curve.p) >= 0:
            raise NotOnCurve("x is not reduced mod p")
        y, _ = recover_y(x, curve, parity_hint=kind & 1)
        return EcPoint(curve, x, y)
    raise ValueError(f"unknown point encoding prefix {kind:#x}")

"""Fixed-capacity big numbers for a platform without native wide arithmetic.

A :class:`BigNum` is a sequence of 16-bit limbs (most significant first)
with a capacity fixed at construction.  Addition, subtraction, comparison,
shifting and long division run on the CPU, limb by limb.  Multiplication,
exponentiation, inversion and square roots are derived from a card
facade's raw modular-exponentiation engine:

* ``x * y mod p``  as  ``((x+y)^2 - x^2 - y^2) / 2 mod p``  (three squarings),
* ``x^-1 mod p``   as  ``x^(p-2) mod p``  for prime ``p``,
* square roots via Tonelli-Shanks on top of the two operations above.

The facade is the only source of wide arithmetic used here; every
operation documents its exact facade call count and the tests pin it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional

from .errors import (
    DivideByZero,
    EvenModulus,
    NegativeResult,
    NonResidue,
    NotPrimeModulus,
    Overflow,
    ZeroModulus,
    ZeroOperand,
)

if TYPE_CHECKING:  # pragma: no cover
    from .facade import CardFacade

LIMB_BITS = 16
LIMB_MASK = 0xFFFF
LIMB_BASE = 1 << LIMB_BITS


def _limbs_for(capacity: int) -> int:
    return (capacity + LIMB_BITS - 1) // LIMB_BITS


class BigNum:
    """Unsigned fixed-capacity number stored as 16-bit limbs, MSB first.

    Instances are immutable; operations return new values.  Capacity is
    in bits and never changes for a given instance.
    """

    __slots__ = ("_limbs", "_capacity")

    def __init__(self, limbs: Iterable[int], capacity: int):
        limbs = tuple(limbs)
        if capacity < 1:
            raise ValueError("capacity must be positive")
        if len(limbs) != _limbs_for(capacity):
            raise ValueError("limb count does not match capacity")
        if any(l < 0 or l > LIMB_MASK for l in limbs):
            raise ValueError("limb out of 16-bit range")
        self._limbs = limbs
        self._capacity = capacity
        if self.bit_length() > capacity:
            raise Overflow(f"value needs {self.bit_length()} bits, capacity is {capacity}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, capacity: int = LIMB_BITS) -> "BigNum":
        return cls((0,) * _limbs_for(capacity), capacity)

    @classmethod
    def from_int(cls, value: int, capacity: Optional[int] = None) -> "BigNum":
        if value < 0:
            raise ValueError("BigNum is unsigned")
        if capacity is None:
            capacity = max(LIMB_BITS, _limbs_for(max(1, value.bit_length())) * LIMB_BITS)
        n = _limbs_for(capacity)
        limbs = []
        v = value
        for _ in range(n):
            limbs.append(v & LIMB_MASK)
            v >>= LIMB_BITS
        if v:
            raise Overflow(f"{value.bit_length()}-bit value exceeds capacity {capacity}")
        limbs.reverse()
        return cls(limbs, capacity)

    @classmethod
    def from_bytes(cls, data: bytes, capacity: Optional[int] = None) -> "BigNum":
        """Big-endian unsigned import; default capacity is the field width."""
        if capacity is None:
            capacity = max(LIMB_BITS, len(data) * 8)
        return cls.from_int(int.from_bytes(data, "big") if data else 0, capacity)

    @classmethod
    def from_hex(cls, text: str, capacity: Optional[int] = None) -> "BigNum":
        text = text.strip().removeprefix("0x").removeprefix("0X")
        if text == "":
            raise ValueError("empty hex string")
        return cls.from_int(int(text, 16), capacity)

    # -- observers ------------------------------------------------------------

    @property
    def capacity(self) -> int:
        return self._capacity

    @property
    def limbs(self) -> tuple:
        return self._limbs

    @property
    def logical_length(self) -> int:
        """Significant bytes of the current value (0 for zero)."""
        return (self.bit_length() + 7) // 8

    def bit_length(self) -> int:
        for i, limb in enumerate(self._limbs):
            if limb:
                return (len(self._limbs) - i - 1) * LIMB_BITS + limb.bit_length()
        return 0

    def is_zero(self) -> bool:
        return all(l == 0 for l in self._limbs)

    def is_odd(self) -> bool:
        return bool(self._limbs[-1] & 1)

    def bit(self, index: int) -> int:
        """Bit at position `index` (0 = least significant)."""
        if index < 0 or index >= self._capacity:
            return 0
        limb = self._limbs[len(self._limbs) - 1 - index // LIMB_BITS]
        return (limb >> (index % LIMB_BITS)) & 1

    # -- exports ----------------------------------------------------------------

    def to_int(self) -> int:
        v = 0
        for limb in self._limbs:
            v = (v << LIMB_BITS) | limb
        return v

    def to_bytes(self, length: Optional[int] = None) -> bytes:
        """Big-endian export, minimal by default, zero-padded when `length` given."""
        raw = b"".join(l.to_bytes(2, "big") for l in self._limbs)
        minimal = raw.lstrip(b"\x00") or b"\x00"
        if length is None:
            return minimal
        if len(minimal) > length:
            raise Overflow(f"value needs {len(minimal)} bytes, field is {length}")
        return minimal.rjust(length, b"\x00")

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    def with_capacity(self, capacity: int) -> "BigNum":
        """Same value at a different capacity (Overflow if it no longer fits)."""
        n = _limbs_for(capacity)
        limbs = list(self._limbs)
        while len(limbs) > n:
            if limbs[0]:
                raise Overflow("value does not fit the narrower capacity")
            limbs.pop(0)
        limbs = [0] * (n - len(limbs)) + limbs
        return BigNum(limbs, capacity)

    # -- value semantics -------------------------------------------------------

    def __int__(self) -> int:
        return self.to_int()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BigNum):
            return NotImplemented
        return compare(self, other) == 0

    def __lt__(self, other) -> bool:
        return compare(self, other) < 0

    def __le__(self, other) -> bool:
        return compare(self, other) <= 0

    def __gt__(self, other) -> bool:
        return compare(self, other) > 0

    def __ge__(self, other) -> bool:
        return compare(self, other) >= 0

    def __hash__(self) -> int:
        return hash(tuple(_trim(_lsb(self))))

    def __repr__(self) -> str:
        return f"BigNum(0x{self.to_hex()}, capacity={self._capacity})"


# -- raw limb helpers (LSB-first digit lists) ---------------------------------

def _lsb(x: BigNum) -> list:
    return list(reversed(x._limbs))


def _trim(d: list) -> list:
    while len(d) > 1 and d[-1] == 0:
        d.pop()
    return d


def _pad(d: list, n: int) -> list:
    if len(d) < n:
        return d + [0] * (n - len(d))
    for i in range(n, len(d)):
        if d[i]:
            raise Overflow("operand wider than the working size")
    return d[:n]


def _cmp_digits(a: list, b: list) -> int:
    n = max(len(a), len(b))
    for i in range(n - 1, -1, -1):
        da = a[i] if i < len(a) else 0
        db = b[i] if i < len(b) else 0
        if da != db:
            return -1 if da < db else 1
    return 0


def _add_digits(a: list, b: list) -> tuple[list, int]:
    n = max(len(a), len(b))
    out = []
    carry = 0
    for i in range(n):
        s = (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) + carry
        out.append(s & LIMB_MASK)
        carry = s >> LIMB_BITS
    return out, carry


def _sub_digits(a: list, b: list) -> list:
    """a - b, requires a >= b."""
    n = max(len(a), len(b))
    out = []
    borrow = 0
    for i in range(n):
        s = (a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) - borrow
        if s < 0:
            s += LIMB_BASE
            borrow = 1
        else:
            borrow = 0
        out.append(s)
    if borrow:
        raise NegativeResult("subtraction went below zero")
    return out


def _shr_digits(d: list, k: int) -> list:
    whole, bits = divmod(k, LIMB_BITS)
    d = d[whole:] or [0]
    if bits == 0:
        return list(d)
    out = []
    for i in range(len(d)):
        lo = d[i] >> bits
        hi = (d[i + 1] << (LIMB_BITS - bits)) & LIMB_MASK if i + 1 < len(d) else 0
        out.append(lo | hi)
    return out


def _shl_digits(d: list, bits: int) -> list:
    """Shift left by bits < 16, growing by one digit when needed."""
    if bits == 0:
        return list(d)
    out = []
    carry = 0
    for digit in d:
        v = (digit << bits) | carry
        out.append(v & LIMB_MASK)
        carry = v >> LIMB_BITS
    if carry:
        out.append(carry)
    return out


def _bitlen_digits(d: list) -> int:
    for i in range(len(d) - 1, -1, -1):
        if d[i]:
            return i * LIMB_BITS + d[i].bit_length()
    return 0


def _divmod_digits(u: list, v: list) -> tuple[list, list]:
    """Schoolbook long division in base 2^16 (Knuth's algorithm D)."""
    u = _trim(list(u))
    v = _trim(list(v))
    if v == [0]:
        raise DivideByZero("division by zero")
    if _cmp_digits(u, v) < 0:
        return [0], u
    if len(v) == 1:
        d = v[0]
        q = [0] * len(u)
        rem = 0
        for i in range(len(u) - 1, -1, -1):
            cur = (rem << LIMB_BITS) | u[i]
            q[i] = cur // d
            rem = cur % d
        return _trim(q), [rem]

    shift = LIMB_BITS - v[-1].bit_length()
    vn = _shl_digits(v, shift)
    un = _shl_digits(u, shift)
    m = len(u) - len(v)
    n = len(vn)
    while len(un) < len(u) + 1:
        un.append(0)

    q = [0] * (m + 1)
    for j in range(m, -1, -1):
        num = (un[j + n] << LIMB_BITS) | un[j + n - 1]
        qhat = num // vn[n - 1]
        rhat = num - qhat * vn[n - 1]
        while qhat >= LIMB_BASE or qhat * vn[n - 2] > ((rhat << LIMB_BITS) | un[j + n - 2]):
            qhat -= 1
            rhat += vn[n - 1]
            if rhat >= LIMB_BASE:
                break
        # multiply-subtract qhat * vn from un[j .. j+n]
        borrow = 0
        carry = 0
        for i in range(n):
            prod = qhat * vn[i] + carry
            carry = prod >> LIMB_BITS
            s = un[i + j] - (prod & LIMB_MASK) - borrow
            if s < 0:
                s += LIMB_BASE
                borrow = 1
            else:
                borrow = 0
            un[i + j] = s
        top = un[j + n] - carry - borrow
        if top < 0:
            # qhat was one too large: add the divisor back once
            qhat -= 1
            c2 = 0
            for i in range(n):
                t = un[i + j] + vn[i] + c2
                un[i + j] = t & LIMB_MASK
                c2 = t >> LIMB_BITS
            top += c2
        un[j + n] = top & LIMB_MASK
        q[j] = qhat
    rem = _shr_digits(un[:n], shift)
    return _trim(q), _trim(rem)


def _build(digits: list, capacity: int) -> BigNum:
    n = _limbs_for(capacity)
    if _bitlen_digits(digits) > capacity:
        raise Overflow(f"{_bitlen_digits(digits)}-bit result exceeds capacity {capacity}")
    padded = _pad(_trim(list(digits)), n)
    return BigNum(tuple(reversed(padded)), capacity)


# -- CPU-side operations (no facade usage) ------------------------------------

def compare(x: BigNum, y: BigNum) -> int:
    """-1, 0 or 1 by numeric value; capacities may differ."""
    return _cmp_digits(_lsb(x), _lsb(y))


def add(x: BigNum, y: BigNum) -> BigNum:
    cap = max(x.capacity, y.capacity)
    out, carry = _add_digits(_lsb(x), _lsb(y))
    if carry:
        raise Overflow("sum exceeds capacity")
    return _build(out, cap)


def subtract(x: BigNum, y: BigNum) -> BigNum:
    if compare(x, y) < 0:
        raise NegativeResult("minuend smaller than subtrahend")
    return _build(_sub_digits(_lsb(x), _lsb(y)), max(x.capacity, y.capacity))


def shift_right(x: BigNum, k: int) -> BigNum:
    if k < 0:
        raise ValueError("negative shift")
    return _build(_shr_digits(_lsb(x), k), x.capacity)


def divide(x: BigNum, y: BigNum) -> tuple[BigNum, BigNum]:
    """Quotient and remainder by limb-wise long division."""
    q, r = _divmod_digits(_lsb(x), _lsb(y))
    return _build(q, x.capacity), _build(r, y.capacity)


@dataclass
class ModContext:
    """A modulus, the facade that accelerates math under it, and a primality claim.

    ``is_prime`` is trusted as asserted by the caller; it gates the
    Fermat-inversion and square-root paths.
    """

    p: BigNum
    facade: "CardFacade"
    is_prime: bool = False

    def __post_init__(self):
        if _cmp_digits(_lsb(self.p), [2]) < 0:
            raise ZeroModulus("modulus must be >= 2")
        self._n = len(self.p._limbs)
        self._inv_exp: Optional[BigNum] = None
        self._euler_exp: Optional[BigNum] = None
        self._sqrt_exp: Optional[BigNum] = None


def _reduced(x: BigNum, ctx: ModContext, name: str) -> list:
    d = _lsb(x)
    if _cmp_digits(d, _lsb(ctx.p)) >= 0:
        raise ValueError(f"{name} is not reduced modulo p")
    return _pad(d, ctx._n)


def mod(x: BigNum, ctx: ModContext) -> BigNum:
    """x mod p via CPU long division; no facade calls."""
    _, r = _divmod_digits(_lsb(x), _lsb(ctx.p))
    return _build(r, ctx.p.capacity)


def mod_add(x: BigNum, y: BigNum, ctx: ModContext) -> BigNum:
    a = _reduced(x, ctx, "x")
    b = _reduced(y, ctx, "y")
    pd = _lsb(ctx.p)
    out, carry = _add_digits(a, b)
    if carry or _cmp_digits(out, pd) >= 0:
        out.append(carry)
        out = _sub_digits(out, pd)
    return _build(out, ctx.p.capacity)


def mod_negate(x: BigNum, ctx: ModContext) -> BigNum:
    d = _reduced(x, ctx, "x")
    if _bitlen_digits(d) == 0:
        return BigNum.zero(ctx.p.capacity)
    return _build(_sub_digits(_lsb(ctx.p), d), ctx.p.capacity)


def mod_sub(x: BigNum, y: BigNum, ctx: ModContext) -> BigNum:
    a = _reduced(x, ctx, "x")
    b = _reduced(y, ctx, "y")
    if _cmp_digits(a, b) >= 0:
        return _build(_sub_digits(a, b), ctx.p.capacity)
    # wrap: x + p - y
    out, carry = _add_digits(a, _lsb(ctx.p))
    out.append(carry)
    return _build(_sub_digits(out, b), ctx.p.capacity)


def _mod_halve(t: BigNum, ctx: ModContext) -> BigNum:
    """t/2 mod p for odd p: shift when even, (t+p)/2 when odd."""
    d = _lsb(t)
    if not (d[0] & 1):
        return _build(_shr_digits(d, 1), ctx.p.capacity)
    out, carry = _add_digits(d, _lsb(ctx.p))
    out.append(carry)
    return _build(_shr_digits(out, 1), ctx.p.capacity)


# -- facade-backed operations --------------------------------------------------

_TWO = None  # set after class definition


def mod_exp(base: BigNum, exponent: BigNum, ctx: ModContext) -> BigNum:
    """base^exponent mod p.  Exactly one facade modpow call."""
    return ctx.facade.modpow(base, exponent, ctx.p)


def _squares_product(x: BigNum, y: BigNum, ctx: ModContext, trace=None) -> BigNum:
    """2*x*y mod p from three coprocessor squarings and CPU add/sub."""
    s = mod_add(x, y, ctx)
    if trace is not None:
        trace.trap(10)
    f = ctx.facade
    sq_s = f.modpow(s, _TWO, ctx.p)
    sq_x = f.modpow(x, _TWO, ctx.p)
    sq_y = f.modpow(y, _TWO, ctx.p)
    if trace is not None:
        trace.trap(20)
    t = mod_sub(mod_sub(sq_s, sq_x, ctx), sq_y, ctx)
    if trace is not None:
        trace.trap(30)
    return t


def mod_mult(x: BigNum, y: BigNum, ctx: ModContext, *, trace=None) -> BigNum:
    """x*y mod p as ((x+y)^2 - x^2 - y^2)/2.  Exactly three facade modpow calls."""
    if not ctx.p.is_odd():
        raise EvenModulus("modular multiplication needs an odd modulus")
    _reduced(x, ctx, "x")
    _reduced(y, ctx, "y")
    t = _squares_product(x, y, ctx, trace)
    r = _mod_halve(t, ctx)
    if trace is not None:
        trace.trap(40)
    return r


# Trap ids fired by mod_mult when a profiling context is passed.
TRACE_STEPS_MOD_MULT = (
    (10, "operand_sum"),
    (20, "squares"),
    (30, "difference"),
    (40, "halve"),
)


def multiply(x: BigNum, y: BigNum, facade: "CardFacade") -> BigNum:
    """Plain product via the squaring trick under the modulus 2^(w+1).

    With w = bits(x) + bits(y) the intermediate 2xy is below 2^(w+1), so
    the halving step is an exact shift and the even modulus is harmless.
    Exactly three facade modpow calls.
    """
    w = x.bit_length() + y.bit_length()
    if w + 2 > facade.max_operand_bits:
        raise Overflow(f"product needs a {w + 2}-bit engine, card allows {facade.max_operand_bits}")
    cap_out = x.capacity + y.capacity
    modulus = BigNum.from_int(1 << (w + 1), w + 2)
    ctx = ModContext(modulus, facade)
    t = _squares_product(x, y, ctx)
    if t.is_odd():  # cannot happen: t = 2xy exactly
        raise Overflow("internal: doubled product came out odd")
    return shift_right(t, 1).with_capacity(cap_out)


def mod_inv(x: BigNum, ctx: ModContext) -> BigNum:
    """x^(p-2) mod p for prime p.  Exactly one facade modpow call."""
    if not ctx.is_prime:
        raise NotPrimeModulus("inversion is only derived for prime moduli")
    if x.is_zero():
        raise ZeroOperand("zero has no inverse")
    _reduced(x, ctx, "x")
    if ctx._inv_exp is None:
        ctx._inv_exp = subtract(ctx.p, _TWO)
    return ctx.facade.modpow(x, ctx._inv_exp, ctx.p)


def _one(ctx: ModContext) -> BigNum:
    return BigNum.from_int(1, ctx.p.capacity)


def mod_sqrt(n: BigNum, ctx: ModContext) -> BigNum:
    """One root r of r^2 = n (mod p); the other is p - r.

    Uses the (p+1)/4 exponent shortcut when p = 3 (mod 4) and full
    Tonelli-Shanks otherwise, built from mod_exp / mod_mult.
    """
    if not ctx.is_prime:
        raise NotPrimeModulus("square roots are only derived for prime moduli")
    d = _reduced(n, ctx, "n")
    cap = ctx.p.capacity
    if _bitlen_digits(d) == 0:
        return BigNum.zero(cap)
    if compare(ctx.p, _TWO) == 0:
        return n.with_capacity(cap)

    one = _one(ctx)
    if ctx._euler_exp is None:
        ctx._euler_exp = shift_right(subtract(ctx.p, one), 1)
    legendre = mod_exp(n, ctx._euler_exp, ctx)
    if compare(legendre, one) != 0:
        raise NonResidue("value has no square root under this modulus")

    if ctx.p._limbs[-1] & 3 == 3:
        if ctx._sqrt_exp is None:
            wide = add(ctx.p.with_capacity(cap + LIMB_BITS), one)
            ctx._sqrt_exp = shift_right(wide, 2)
        return mod_exp(n, ctx._sqrt_exp, ctx)

    # Tonelli-Shanks: p - 1 = q * 2^s with q odd
    p_minus_1 = subtract(ctx.p, one)
    s = 0
    q = p_minus_1
    while not q.is_odd():
        q = shift_right(q, 1)
        s += 1

    z = 2
    p_minus_1 = p_minus_1.with_capacity(cap)
    while True:
        cand = BigNum.from_int(z, cap)
        if compare(mod_exp(cand, ctx._euler_exp, ctx), p_minus_1) == 0:
            break
        z += 1

    m = s
    c = mod_exp(BigNum.from_int(z, cap), q, ctx)
    t = mod_exp(n, q, ctx)
    r = mod_exp(n, shift_right(add(q.with_capacity(cap + LIMB_BITS), one), 1), ctx)
    while compare(t, one) != 0:
        i = 0
        probe = t
        while compare(probe, one) != 0:
            probe = mod_exp(probe, _TWO, ctx)
            i += 1
        gap = m - i - 1
        b = mod_exp(c, BigNum.from_int(1 << gap, gap + 1), ctx)
        c = mod_exp(b, _TWO, ctx)
        t = mod_mult(t, c, ctx)
        r = mod_mult(r, b, ctx)
        m = i
    return r


# -- 32-bit signed integers -----------------------------------------------------

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1


@dataclass(frozen=True)
class Int32:
    """Checked 32-bit signed value; arithmetic overflow raises, never wraps."""

    value: int

    def __post_init__(self):
        if not INT32_MIN <= self.value <= INT32_MAX:
            raise Overflow(f"{self.value} outside 32-bit signed range")


def int32_arith(op: str, a, b) -> Int32:
    """ADD/SUB/MUL/DIV/MOD with truncated (round-toward-zero) division."""
    av = a.value if isinstance(a, Int32) else Int32(a).value
    bv = b.value if isinstance(b, Int32) else Int32(b).value
    op = op.upper()
    if op == "ADD":
        r = av + bv
    elif op == "SUB":
        r = av - bv
    elif op == "MUL":
        r = av * bv
    elif op in ("DIV", "MOD"):
        if bv == 0:
            raise DivideByZero("integer division by zero")
        q = abs(av) // abs(bv)
        if (av < 0) != (bv < 0):
            q = -q
        r = q if op == "DIV" else av - bv * q
    else:
        raise ValueError(f"unknown operation {op!r}")
    if not INT32_MIN <= r <= INT32_MAX:
        raise Overflow(f"{op} result {r} outside 32-bit signed range")
    return Int32(r)


_TWO = BigNum.from_int(2)

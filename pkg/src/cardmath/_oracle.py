"""Reference arithmetic used to validate the derived operations.

Test scaffolding only: everything here works on plain Python integers,
shares no code with the limb-based layers, and never touches a card
facade.  Not part of the public API; import paths may change.

Points are ``(x, y)`` tuples, the point at infinity is ``None``.
"""

from __future__ import annotations

import random

from .errors import NonResidue

INFINITY = None


class NoInverse(ArithmeticError):
    """Operand shares a factor with the modulus."""


# --- modular arithmetic -----------------------------------------------------

def ref_mod_add(x: int, y: int, m: int) -> int:
    return (x + y) % m


def ref_mod_sub(x: int, y: int, m: int) -> int:
    return (x - y) % m


def ref_mod_mul(x: int, y: int, m: int) -> int:
    return (x * y) % m


def ref_mod_pow(base: int, exponent: int, m: int) -> int:
    """Left-to-right square-and-multiply; each step multiplies then reduces."""
    if m < 2:
        raise ValueError("modulus must be >= 2")
    result = 1 % m
    base %= m
    for i in reversed(range(exponent.bit_length())):
        result = (result * result) % m
        if (exponent >> i) & 1:
            result = (result * base) % m
    return result


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with a*s + b*t = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def ref_mod_inv(x: int, m: int) -> int:
    """Inverse via extended GCD (no exponentiation involved)."""
    g, s, _ = egcd(x % m, m)
    if g != 1:
        raise NoInverse(f"gcd({x}, {m}) = {g}")
    return s % m


def ref_mod_sqrt(n: int, p: int) -> int:
    """A square root of n mod prime p.

    Exhaustive search below 2**20, Tonelli-Shanks above (so large-width
    checks cross two unrelated code paths).  Raises NonResidue when no
    root exists.
    """
    n %= p
    if n == 0:
        return 0
    if p < (1 << 20):
        for r in range(p):
            if (r * r) % p == n:
                return r
        raise NonResidue(f"{n} is not a square mod {p}")
    if pow(n, (p - 1) // 2, p) != 1:
        raise NonResidue(f"{n} is not a square mod {p}")
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    # Tonelli-Shanks, p = q * 2^s + 1 with q odd
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, probe = 0, t
        while probe != 1:
            probe = (probe * probe) % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, (b * b) % p
        t, r = (t * c) % p, (r * b) % p
    return r


def is_probable_prime(n: int, rounds: int = 16) -> bool:
    """Miller-Rabin with fixed small bases plus random ones."""
    if n < 2:
        return False
    for sp in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n)
    bases = [2, 3, 5, 7, 11, 13] + [rng.randrange(2, n - 1) for _ in range(rounds)]
    for a in bases:
        x = pow(a % n, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: random.Random) -> int:
    """Random odd prime with exactly `bits` bits."""
    while True:
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(cand):
            return cand


# --- elliptic curves --------------------------------------------------------

def ref_ec_add(P, Q, p: int, a: int):
    """Affine chord-and-tangent addition; None is the identity."""
    if P is INFINITY:
        return Q
    if Q is INFINITY:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and (y1 + y2) % p == 0:
        return INFINITY
    if P == Q:
        lam = (3 * x1 * x1 + a) * pow(2 * y1 % p, -1, p) % p
    else:
        lam = (y2 - y1) * pow((x2 - x1) % p, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return (x3, y3)


def ref_ec_double(P, p: int, a: int):
    return ref_ec_add(P, P, p, a)


def ref_ec_neg(P, p: int):
    if P is INFINITY:
        return INFINITY
    return (P[0], (p - P[1]) % p)


def ref_ec_mul(k: int, P, p: int, a: int):
    """Binary double-and-add."""
    if k < 0:
        raise ValueError("negative scalar")
    acc = INFINITY
    addend = P
    while k:
        if k & 1:
            acc = ref_ec_add(acc, addend, p, a)
        addend = ref_ec_add(addend, addend, p, a)
        k >>= 1
    return acc


def ref_ec_on_curve(P, p: int, a: int, b: int) -> bool:
    if P is INFINITY:
        return True
    x, y = P
    return (y * y - (x * x * x + a * x + b)) % p == 0


def ref_ec_enumerate(p: int, a: int, b: int) -> list:
    """All points of a small curve (p < 2**10), infinity first."""
    if p >= (1 << 10):
        raise ValueError("enumeration is reserved for tiny curves")
    squares: dict[int, list[int]] = {}
    for y in range(p):
        squares.setdefault((y * y) % p, []).append(y)
    points: list = [INFINITY]
    for x in range(p):
        rhs = (x * x * x + a * x + b) % p
        for y in squares.get(rhs, ()):
            points.append((x, y))
    return points

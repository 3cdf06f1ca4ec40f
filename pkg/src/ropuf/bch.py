"""Binary BCH(31,16,7) codec over GF(2^5) and a code-offset fuzzy extractor.

The field is built on the primitive polynomial x^5 + x^2 + 1 (0x25); any
primitive choice gives an equivalent code, but fixing one makes helper
data and test vectors bit-exact.  The generator polynomial is the lcm of
the minimal polynomials of alpha, alpha^3 and alpha^5 (degree 15,
designed distance 7, corrects t = 3 errors).

Bit layout of a 31-bit word: index i holds the coefficient of x^(30-i),
so bits[0:16] are the 16 systematic message bits and bits[16:31] the
parity bits, and rotating the vector is multiplication by x modulo
x^31 - 1.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DecodeFailure
from .rng import ensure_rng
from .sampler import ResponseWord

N = 31
K = 16
T = 3
PRIMITIVE_POLY = 0x25  # x^5 + x^2 + 1


class Gf32:
    """GF(2^5) arithmetic via exp/log tables."""

    def __init__(self, prim_poly: int = PRIMITIVE_POLY):
        self.exp = [0] * (2 * N)
        self.log = [0] * (N + 1)
        x = 1
        for i in range(N):
            self.exp[i] = x
            self.log[x] = i
            x <<= 1
            if x & 0x20:
                x ^= prim_poly
        for i in range(N, 2 * N):
            self.exp[i] = self.exp[i - N]

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("no inverse of 0 in GF(32)")
        return self.exp[N - self.log[a]]

    def pow_alpha(self, e: int) -> int:
        return self.exp[e % N]


GF = Gf32()


def _minimal_polynomial(power: int) -> list[int]:
    """Minimal polynomial of alpha^power over GF(2), coefficients ascending."""
    cls, e = [], power % N
    while e not in cls:
        cls.append(e)
        e = (2 * e) % N
    poly = [1]  # product of (x + alpha^e) over the conjugacy class
    for e in cls:
        root = GF.pow_alpha(e)
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] ^= c
            nxt[i] ^= GF.mul(c, root)
        poly = nxt
    assert all(c in (0, 1) for c in poly)
    return poly


def _poly_to_mask(coeffs: list[int]) -> int:
    mask = 0
    for i, c in enumerate(coeffs):
        mask |= (c & 1) << i
    return mask


def _gf2_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _gf2_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm and a:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def build_generator() -> int:
    """Generator polynomial g(x) as a GF(2) coefficient bitmask.

    g = lcm of the minimal polynomials of alpha, alpha^3, alpha^5; the
    three are distinct and irreducible, so the lcm is their product.
    """
    g = 1
    for p in (1, 3, 5):
        g = _gf2_mul(g, _poly_to_mask(_minimal_polynomial(p)))
    assert g.bit_length() - 1 == N - K
    return g


GENERATOR = build_generator()


def generator_coefficients() -> list[int]:
    """Coefficients of g(x), ascending degree (length 16)."""
    return [(GENERATOR >> i) & 1 for i in range(N - K + 1)]


def _word_to_poly_int(word: ResponseWord) -> int:
    # bits[i] is the coefficient of x^(30-i)
    return word.to_int()


def _poly_int_to_word(value: int, length: int) -> ResponseWord:
    bits = [(value >> (length - 1 - i)) & 1 for i in range(length)]
    return ResponseWord(np.array(bits, dtype=np.uint8))


def encode(message: ResponseWord) -> ResponseWord:
    """Systematic encoding: parity is (message * x^15) mod g."""
    if len(message) != K:
        raise ValueError(f"message must be {K} bits, got {len(message)}")
    shifted = _word_to_poly_int(message) << (N - K)
    return _poly_int_to_word(shifted | _gf2_mod(shifted, GENERATOR), N)


# Syndrome power tables: _SYN_POW[j][p] = alpha^(j*p) for x-power p.
_SYN_POW = {j: np.array([GF.pow_alpha(j * p) for p in range(N)], dtype=np.int64)
            for j in (1, 3, 5)}


def _syndromes(bits: np.ndarray) -> tuple[int, int, int]:
    powers = 30 - np.flatnonzero(bits)
    if powers.size == 0:
        return 0, 0, 0
    return tuple(int(np.bitwise_xor.reduce(_SYN_POW[j][powers])) for j in (1, 3, 5))


def _berlekamp_massey(syn: list[int]) -> list[int]:
    """Error locator polynomial from syndromes S1..S6 (ascending coeffs)."""
    c, b = [1], [1]
    L, m, bb = 0, 1, 1
    for n, s in enumerate(syn):
        d = s
        for i in range(1, L + 1):
            if i < len(c):
                d ^= GF.mul(c[i], syn[n - i])
        if d == 0:
            m += 1
            continue
        coef = GF.mul(d, GF.inv(bb))
        shifted = [0] * m + [GF.mul(coef, x) for x in b]
        merged = [0] * max(len(c), len(shifted))
        for i, x in enumerate(c):
            merged[i] ^= x
        for i, x in enumerate(shifted):
            merged[i] ^= x
        if 2 * L <= n:
            b, bb, L, m = c, d, n + 1 - L, 1
        else:
            m += 1
        c = merged
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def decode(received: ResponseWord) -> tuple[ResponseWord, int]:
    """Correct up to 3 bit errors; return (codeword, number corrected).

    Raises DecodeFailure when the error locator is inconsistent (more
    than t errors).  A 4-error pattern is never silently absorbed: at
    most 3 positions are ever flipped.
    """
    if len(received) != N:
        raise ValueError(f"received word must be {N} bits, got {len(received)}")
    bits = received.bits
    s1, s3, s5 = _syndromes(bits)
    if s1 == 0 and s3 == 0 and s5 == 0:
        return received, 0
    # Binary code: even syndromes are squares of the earlier ones.
    s2 = GF.mul(s1, s1)
    s4 = GF.mul(s2, s2)
    s6 = GF.mul(s3, s3)
    locator = _berlekamp_massey([s1, s2, s3, s4, s5, s6])
    degree = len(locator) - 1
    if degree > T:
        raise DecodeFailure(f"locator degree {degree} exceeds t={T}")
    positions = []
    for p in range(N):  # Chien search: root alpha^-p marks an error at x^p
        x = GF.pow_alpha(N - p)
        acc, xp = locator[0], 1
        for c in locator[1:]:
            xp = GF.mul(xp, x)
            acc ^= GF.mul(c, xp)
        if acc == 0:
            positions.append(p)
    if len(positions) != degree:
        raise DecodeFailure("error locator roots do not match its degree")
    corrected = bits.copy()
    for p in positions:
        corrected[30 - p] ^= 1
    if any(_syndromes(corrected)):
        raise DecodeFailure("correction left a nonzero syndrome")
    return ResponseWord(corrected), degree


@dataclass(frozen=True)
class HelperData:
    """Public code-offset helper: offset = encode(key) XOR response.

    The offset reveals at most the 15 parity bits' worth of information
    about the response; key_hash is an optional integrity digest of the
    enrolled key.
    """

    offset: ResponseWord
    key_hash: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "offset_hex": self.offset.to_hex(),
            "key_hash_hex": self.key_hash,
            "code": "BCH(31,16,7)",
            "primpoly": "0x25",
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "HelperData":
        return cls(offset=ResponseWord.from_hex(data["offset_hex"], N),
                   key_hash=data.get("key_hash_hex"))


def key_digest(key: ResponseWord) -> str:
    return hashlib.sha256(np.packbits(key.bits).tobytes()).hexdigest()


def fe_enroll(response: ResponseWord, seed) -> tuple[ResponseWord, HelperData]:
    """Enroll a 31-bit response: draw a uniform 16-bit key, publish offset."""
    if len(response) != N:
        raise ValueError(f"response must be {N} bits, got {len(response)}")
    rng = ensure_rng(seed)
    key = ResponseWord(rng.integers(0, 2, size=K, dtype=np.uint8))
    offset = encode(key) ^ response
    return key, HelperData(offset=offset, key_hash=key_digest(key))


def fe_reproduce(response: ResponseWord, helper: HelperData) -> ResponseWord:
    """Recover the enrolled key from a noisy response (up to 3 bit errors)."""
    if len(response) != N:
        raise ValueError(f"response must be {N} bits, got {len(response)}")
    codeword, _ = decode(response ^ helper.offset)
    return ResponseWord(codeword.bits[:K])


def correct_response(response: ResponseWord, helper: HelperData) -> ResponseWord:
    """Noisy response mapped back onto the enrolled one (error removal)."""
    codeword, _ = decode(response ^ helper.offset)
    return codeword ^ helper.offset


def save_helper(helper: HelperData, path: str | Path) -> None:
    Path(path).write_text(json.dumps(helper.to_json_dict(), indent=2) + "\n")


def load_helper(path: str | Path) -> HelperData:
    return HelperData.from_json_dict(json.loads(Path(path).read_text()))


# --- self-test ---------------------------------------------------------


def generator_matrix() -> np.ndarray:
    """Systematic generator matrix: row i encodes the i-th unit message."""
    g = np.zeros((K, N), dtype=np.uint8)
    for i in range(K):
        unit = np.zeros(K, dtype=np.uint8)
        unit[i] = 1
        g[i] = encode(ResponseWord(unit)).bits
    return g


def selftest(random_error_trials: int = 10000, seed: int = 1) -> list[tuple[str, bool]]:
    """Battery of codec checks; returns (name, passed) per check."""
    results = []

    def eval_gen(elem: int) -> int:
        acc, xp = 0, 1
        for i in range(GENERATOR.bit_length()):
            if (GENERATOR >> i) & 1:
                acc ^= xp
            xp = GF.mul(xp, elem)
        return acc

    results.append(("generator degree 15", GENERATOR.bit_length() - 1 == N - K))
    results.append(("generator roots alpha^1..6",
                    all(eval_gen(GF.pow_alpha(i)) == 0 for i in range(1, 7))))
    results.append(("generator divides x^31 + 1",
                    _gf2_mod((1 << N) | 1, GENERATOR) == 0))

    g = generator_matrix()
    msgs = ((np.arange(1 << K)[:, None] >> np.arange(K - 1, -1, -1)) & 1).astype(np.uint8)
    weights = ((msgs @ g) % 2).sum(axis=1)
    results.append(("minimum nonzero codeword weight == 7",
                    int(weights[1:].min()) == 7 and int(weights[0]) == 0))

    rng = ensure_rng(seed)
    base = encode(ResponseWord(rng.integers(0, 2, K, dtype=np.uint8)))
    ok = True
    for i in range(N):
        for j in range(i, N):  # i == j gives the 31 single-error cases
            noisy = base.bits.copy()
            noisy[i] ^= 1
            if j != i:
                noisy[j] ^= 1
            try:
                fixed, nerr = decode(ResponseWord(noisy))
                ok &= fixed == base and nerr == (1 if j == i else 2)
            except DecodeFailure:
                ok = False
    results.append(("exhaustive 1- and 2-error correction", ok))

    ok = True
    for _ in range(random_error_trials):
        cw = encode(ResponseWord(rng.integers(0, 2, K, dtype=np.uint8)))
        pos = rng.choice(N, size=3, replace=False)
        noisy = cw.bits.copy()
        noisy[pos] ^= 1
        try:
            fixed, nerr = decode(ResponseWord(noisy))
            ok &= fixed == cw and nerr == 3
        except DecodeFailure:
            ok = False
    results.append((f"{random_error_trials} random 3-error corrections", ok))

    ok = True
    for _ in range(1000):
        cw = encode(ResponseWord(rng.integers(0, 2, K, dtype=np.uint8)))
        try:
            fixed, nerr = decode(cw)
            ok &= fixed == cw and nerr == 0
        except DecodeFailure:
            ok = False
    results.append(("1000 zero-error decodes are identities", ok))
    return results

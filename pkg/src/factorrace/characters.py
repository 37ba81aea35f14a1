"""Dirichlet characters mod q with exact root-of-unity bookkeeping.

A character is represented by its exponent table: for each residue a the
stored value e(a) means chi(a) = exp(2*pi*i*e(a)/d), where d is the exact
multiplicative order of chi; residues not coprime to q carry the sentinel
-1.  The table is built from an explicit cyclic decomposition of (Z/qZ)*:
the smallest primitive root for each odd prime-power factor, and the pair
{-1, 5} for 2^k with k >= 3.  All arithmetic on exponents is integer
arithmetic; complex values appear only at evaluation boundaries, exactly
for the quadrant roots 1, i, -1, -i.

Characters are addressed as (q, index) where index is the position in the
canonical enumeration: lexicographic over the exponent vectors with respect
to the fixed generator list, so index 0 is always the principal character.
This labelling is deliberately not Conrey's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

__all__ = [
    "MAX_MODULUS",
    "DirichletCharacter",
    "enumerate_characters",
    "character",
    "evaluate",
    "gauss_sum",
    "root_number",
    "conjugate_character",
    "real_sign_table",
]

MAX_MODULUS = 10_000


def _factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def _primitive_root(p: int, e: int) -> int:
    """Smallest primitive root modulo the odd prime power p**e."""
    pe = p**e
    phi = (p - 1) * p ** (e - 1)
    prime_factors = [f for f, _ in _factorize(phi)]
    g = 2
    while True:
        if math.gcd(g, pe) == 1 and all(pow(g, phi // f, pe) != 1 for f in prime_factors):
            return g
        g += 1


def _crt_lift(residue: int, pe: int, q: int) -> int:
    """The unit mod q that is `residue` mod pe and 1 mod q/pe."""
    m2 = q // pe
    if m2 == 1:
        return residue % q
    return (residue * m2 * pow(m2, -1, pe) + pe * pow(pe, -1, m2)) % q


@dataclass(frozen=True)
class _GroupData:
    q: int
    generators: tuple[int, ...]
    orders: tuple[int, ...]
    exponent: int  # lcm of the cyclic orders
    dlog: np.ndarray  # (q, r) int64, row a = discrete logs of a; junk off units
    units: np.ndarray  # (q,) bool
    # conductor slots: ("odd", p, pos) | ("four", pos) | ("two_high", pos_neg, pos_five)
    slots: tuple[tuple, ...]


@lru_cache(maxsize=None)
def _group_structure(q: int) -> _GroupData:
    if not isinstance(q, int) or q < 1 or q > MAX_MODULUS:
        raise ValueError(f"modulus must be an integer in [1, {MAX_MODULUS}], got {q!r}")
    generators: list[int] = []
    orders: list[int] = []
    slots: list[tuple] = []
    for p, e in _factorize(q):
        pe = p**e
        if p == 2:
            if e == 1:
                continue  # (Z/2Z)* trivial
            if e == 2:
                slots.append(("four", len(generators)))
                generators.append(_crt_lift(3, 4, q))
                orders.append(2)
            else:
                slots.append(("two_high", len(generators), len(generators) + 1))
                generators.append(_crt_lift(pe - 1, pe, q))
                orders.append(2)
                generators.append(_crt_lift(5, pe, q))
                orders.append(pe // 4)
        else:
            slots.append(("odd", p, len(generators)))
            generators.append(_crt_lift(_primitive_root(p, e), pe, q))
            orders.append((p - 1) * p ** (e - 1))

    r = len(generators)
    exponent = math.lcm(*orders) if orders else 1
    dlog = np.zeros((q, r), dtype=np.int64)
    units = np.zeros(q, dtype=bool)
    pow_tables = [[pow(g, k, q) for k in range(s)] for g, s in zip(generators, orders)]
    for tup in product(*(range(s) for s in orders)):
        a = 1 % q
        for k, tab in zip(tup, pow_tables):
            a = a * tab[k] % q
        dlog[a] = tup
        units[a] = True
    return _GroupData(q, tuple(generators), tuple(orders), exponent, dlog, units, tuple(slots))


def _local_conductor(slot: tuple, orders: tuple[int, ...], t: tuple[int, ...]) -> int:
    kind = slot[0]
    if kind == "odd":
        _, p, pos = slot
        ti = t[pos]
        if ti == 0:
            return 1
        d_loc = orders[pos] // math.gcd(orders[pos], ti)
        v = 0
        while d_loc % p == 0:
            d_loc //= p
            v += 1
        return p ** (v + 1)
    if kind == "four":
        return 4 if t[slot[1]] else 1
    # two_high: conductor 4 * ord(chi(5)) when chi(5) != 1, else 4 or 1
    _, pos_neg, pos_five = slot
    tb = t[pos_five]
    if tb:
        return 4 * (orders[pos_five] // math.gcd(orders[pos_five], tb))
    return 4 if t[pos_neg] else 1


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """A Dirichlet character mod q, stored as exact exponents of a d-th root of unity."""

    modulus: int
    index: int
    order: int
    value_exponents: np.ndarray  # int32, length q; -1 where gcd(a, q) > 1
    generator_exponents: tuple[int, ...]
    parity: int  # 0 if chi(-1) = 1, else 1
    conductor: int
    is_principal: bool
    is_real: bool
    is_primitive: bool

    def __post_init__(self):
        self.value_exponents.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.index == other.index
            and self.order == other.order
            and np.array_equal(self.value_exponents, other.value_exponents)
        )

    def __hash__(self):
        return hash((self.modulus, self.index))

    def __repr__(self):
        return f"DirichletCharacter(q={self.modulus}, index={self.index}, order={self.order})"

    def __call__(self, n: int) -> complex:
        return evaluate(self, n)


def _root_of_unity(e: int, d: int) -> complex:
    """exp(2*pi*i*e/d), exact for the four quadrant roots."""
    num = (4 * e) % (4 * d)
    if num % d == 0:
        return ((1 + 0j), 1j, (-1 + 0j), -1j)[num // d]
    ang = 2.0 * math.pi * e / d
    return complex(math.cos(ang), math.sin(ang))


def _build_character(q: int, t: tuple[int, ...], index: int, data: _GroupData) -> DirichletCharacter:
    orders = data.orders
    e_grp = data.exponent
    d = math.lcm(*(s // math.gcd(s, ti) for s, ti in zip(orders, t))) if orders else 1

    if orders:
        weights = np.array([ti * (e_grp // s) for ti, s in zip(t, orders)], dtype=np.int64)
        raw = (data.dlog @ weights) % e_grp
        # every value is a d-th root of unity, so raw is a multiple of e_grp // d
        table = np.where(data.units, (raw * d) // e_grp, -1).astype(np.int32)
    else:
        table = np.where(data.units, 0, -1).astype(np.int32)

    parity = 0
    if q > 2:
        parity = 0 if table[q - 1] == 0 else 1
    conductor = 1
    for slot in data.slots:
        conductor *= _local_conductor(slot, orders, t)
    return DirichletCharacter(
        modulus=q,
        index=index,
        order=d,
        value_exponents=table,
        generator_exponents=t,
        parity=parity,
        conductor=conductor,
        is_principal=(d == 1),
        is_real=(d <= 2),
        is_primitive=(conductor == q),
    )


def enumerate_characters(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters mod q in the canonical deterministic order.

    Index 0 is the principal character; the order is lexicographic over the
    exponent vectors on the fixed generator list, so it is independent of
    platform and thread count.
    """
    data = _group_structure(q)
    return [
        _build_character(q, t, i, data)
        for i, t in enumerate(product(*(range(s) for s in data.orders)))
    ]


def character(q: int, index: int) -> DirichletCharacter:
    """The character addressed (q, index) in the canonical enumeration."""
    data = _group_structure(q)
    phi = math.prod(data.orders)
    if not 0 <= index < phi:
        raise ValueError(f"character index {index} out of range [0, {phi}) for q={q}")
    t = []
    rem = index
    for s in reversed(data.orders):
        t.append(rem % s)
        rem //= s
    return _build_character(q, tuple(reversed(t)), index, data)


def conjugate_character(chi: DirichletCharacter) -> DirichletCharacter:
    """The complex-conjugate character (same q, negated exponents)."""
    data = _group_structure(chi.modulus)
    t = tuple((s - ti) % s for s, ti in zip(data.orders, chi.generator_exponents))
    index = 0
    for ti, s in zip(t, data.orders):
        index = index * s + ti
    return _build_character(chi.modulus, t, index, data)


def evaluate(chi: DirichletCharacter, n: int) -> complex:
    """chi(n) as a complex number; exactly in {-1, 0, 1} for real characters."""
    e = int(chi.value_exponents[n % chi.modulus])
    if e < 0:
        return 0j
    return _root_of_unity(e, chi.order)


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_{a=1}^{q} chi(a) e^{2 pi i a / q}; requires chi primitive."""
    if not chi.is_primitive:
        raise ValueError(
            f"Gauss sum requires a primitive character; conductor {chi.conductor} != modulus {chi.modulus}"
        )
    q = chi.modulus
    if q == 1:
        return 1 + 0j  # single term chi(1) * e^{2 pi i}
    total = 0j
    for a in range(1, q + 1):
        e = int(chi.value_exponents[a % q])
        if e >= 0:
            total += _root_of_unity(e, chi.order) * _root_of_unity(a, q)
    return total


def root_number(chi: DirichletCharacter) -> complex:
    """epsilon_chi = tau(chi) / (i^parity * sqrt(q)); unimodular for primitive chi."""
    if not chi.is_primitive:
        raise ValueError("root number requires a primitive character")
    tau = gauss_sum(chi)
    return tau / ((1j**chi.parity) * math.sqrt(chi.modulus))


def real_sign_table(chi: DirichletCharacter) -> np.ndarray:
    """Values of a real character as an int8 array over residues (entries -1, 0, 1)."""
    if not chi.is_real:
        raise ValueError("sign table is only defined for real characters")
    table = np.zeros(chi.modulus, dtype=np.int8)
    exps = chi.value_exponents
    table[exps == 0] = 1
    if chi.order == 2:
        table[exps == 1] = -1
    return table

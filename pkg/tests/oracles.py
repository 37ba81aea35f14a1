"""Independent reference computations used to validate the library.

These deliberately avoid the code paths they check: factor counts come from
plain trial division, L-values from accelerated alternating series, zero
locations from a dumb fine-grid bisection, and the Mertens-type constants
from direct prime sums.
"""

from __future__ import annotations

import math

import numpy as np


def trial_factor_counts(n: int) -> tuple[int, int]:
    """(omega(n), Omega(n)) by trial division."""
    if n <= 1:
        return 0, 0
    w = big = 0
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            w += 1
            while m % p == 0:
                m //= p
                big += 1
        p += 1 if p == 2 else 2
    if m > 1:
        w += 1
        big += 1
    return w, big


def trial_factor_table(x_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Vector of trial-division counts for 0 <= n <= x_max."""
    omega = np.zeros(x_max + 1, dtype=np.int64)
    bomega = np.zeros(x_max + 1, dtype=np.int64)
    for n in range(2, x_max + 1):
        w, b = trial_factor_counts(n)
        omega[n] = w
        bomega[n] = b
    return omega, bomega


def alternating_sum(term, n: int = 50) -> float:
    """sum_{k>=0} (-1)^k term(k) by Cohen-Rodriguez Villegas-Zagier acceleration."""
    d = (3.0 + math.sqrt(8.0)) ** n
    d = (d + 1.0 / d) / 2.0
    b = -1.0
    c = -d
    s = 0.0
    for k in range(n):
        c = b - c
        s += c * term(k)
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0))
    return s / d


def zeta_eta(s: float) -> float:
    """Riemann zeta via the eta (alternating) series, real s > 0, s != 1."""
    eta = alternating_sum(lambda k: (k + 1.0) ** (-s))
    return eta / (1.0 - 2.0 ** (1.0 - s))


def zeta_prime_eta(s: float) -> float:
    """zeta'(s) from the term-wise derivative of the eta series."""
    eta_prime = alternating_sum(lambda k: -math.log(k + 1.0) * (k + 1.0) ** (-s) if k else 0.0)
    scale = 1.0 - 2.0 ** (1.0 - s)
    dscale = math.log(2.0) * 2.0 ** (1.0 - s)
    return (eta_prime - dscale * zeta_eta(s)) / scale


def beta_chi4(s: float) -> float:
    """L(s, chi_-4) = sum_{k>=0} (-1)^k (2k+1)^{-s} (Dirichlet beta)."""
    return alternating_sum(lambda k: (2.0 * k + 1.0) ** (-s))


def beta_prime_chi4(s: float) -> float:
    """L'(s, chi_-4) from the term-wise derivative of the beta series."""
    return -alternating_sum(lambda k: math.log(2.0 * k + 1.0) * (2.0 * k + 1.0) ** (-s))


def bisect_sign_change(f, lo: float, hi: float, step: float = 1e-4) -> float | None:
    """First zero of f in [lo, hi]: fine grid, then plain bisection."""
    t_prev = lo
    f_prev = f(lo)
    t = lo
    while t < hi:
        t = min(hi, t + step)
        ft = f(t)
        if f_prev == 0.0:
            return t_prev
        if (f_prev < 0) != (ft < 0):
            a, b, fa = t_prev, t, f_prev
            for _ in range(60):
                m = 0.5 * (a + b)
                if m <= a or m >= b:
                    break
                fm = f(m)
                if fm == 0.0:
                    return m
                if (fa < 0) != (fm < 0):
                    b = m
                else:
                    a, fa = m, fm
            return 0.5 * (a + b)
        t_prev, f_prev = t, ft
    return None


def prime_harmonic_sums(limit: int) -> tuple[float, float]:
    """(sum_{p<=limit} 1/p, sum_{p<=limit} 1/(p(p-1))) from an odd-only sieve."""
    if limit < 2:
        return 0.0, 0.0
    half = (limit - 1) // 2  # index i represents the odd number 2i+1
    sieve = np.ones(half + 1, dtype=bool)
    sieve[0] = False  # 1 is not prime
    i = 1
    while True:
        p = 2 * i + 1
        if p * p > limit:
            break
        if sieve[i]:
            start = (p * p - 1) // 2
            sieve[start::p] = False
        i += 1
    odd_primes = 2.0 * np.flatnonzero(sieve) + 1.0
    inv = float(np.sum(1.0 / odd_primes)) + 0.5
    invsq = float(np.sum(1.0 / (odd_primes * (odd_primes - 1.0)))) + 0.5
    return inv, invsq


def mertens_constants(limit: int) -> tuple[float, float]:
    """Estimates of the linear-term constants in the Hardy-Ramanujan sums:
    A ~ sum_{p<=limit} 1/p - log log limit, B = A + sum_p 1/(p(p-1))."""
    inv, invsq = prime_harmonic_sums(limit)
    a = inv - math.log(math.log(limit))
    return a, a + invsq

"""Locate critical-line zeros of primitive Dirichlet L-functions.

Zeros rho = 1/2 + i*gamma are detected as sign changes of the rotated
real-valued function Z_chi(t) on a grid whose step tracks the local mean
zero gap, h(t) = 0.25 * 2*pi / log(q*(|t|+10)/(2*pi) + e), then refined by
bisection plus a secant polish until |L(1/2 + i*gamma, chi)| drops below
1e-10.  L'(rho, chi) is evaluated analytically at the refined point.

Completeness is checked against the smooth counting function

    N_hat(T) = (T/pi) * log(q*T / (2*pi*e))        (zeros with |gamma| <= T),

with a per-unit-window deficit triggering a rescan at a quarter of the
grid step.  A persistent mismatch raises MissedZeroError rather than
returning a silently incomplete cache.  Zeros of even order would show up
as near-zero grid values without a sign change; they are reported as a
warning, never absorbed (simple zeros are the working assumption).

Real characters are scanned on [0, T] only and mirrored, since their zeros
come in conjugate pairs with L'(conj rho) = conj L'(rho); complex
characters are scanned over the full [-T, T].
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

from ._csvio import atomic_write_text, fmt_float
from .characters import DirichletCharacter
from .lfunction import DEFAULT_PARAMS, EvalParams, _rotation_phase, l_value

__all__ = [
    "FORMAT_VERSION",
    "MAX_SCAN_HEIGHT",
    "ZeroRecord",
    "ZeroCache",
    "CountReport",
    "MissedZeroError",
    "CacheFormatError",
    "smooth_zero_count",
    "scan_zeros",
    "count_check",
    "store_cache",
    "load_cache",
    "cache_filename",
]

FORMAT_VERSION = "1"
MAX_SCAN_HEIGHT = 1.0e3
REFINE_TARGET = 1e-10
MIN_ZERO_GAP = 1e-6


class MissedZeroError(RuntimeError):
    """The zero count is inconsistent with the smooth count after refinement."""

    def __init__(self, message: str, windows: list[int]):
        super().__init__(message)
        self.windows = windows


class CacheFormatError(ValueError):
    """A zero-cache file failed structural validation."""


@dataclass(frozen=True)
class ZeroRecord:
    gamma: float
    l_prime: complex
    residual: float  # |L(1/2 + i*gamma)| after refinement


@dataclass(frozen=True)
class ZeroCache:
    q: int
    chi_index: int
    t_scanned: float
    version: str
    records: tuple[ZeroRecord, ...]

    @property
    def count(self) -> int:
        return len(self.records)

    def gammas(self) -> list[float]:
        return [r.gamma for r in self.records]

    def select(self, t0: float) -> list[ZeroRecord]:
        if t0 > self.t_scanned:
            raise ValueError(f"T0={t0} exceeds scanned height {self.t_scanned}")
        return [r for r in self.records if abs(r.gamma) <= t0]


def smooth_zero_count(t: float, q: int) -> float:
    """Expected number of zeros with |gamma| <= t for a primitive character mod q."""
    if t <= 0:
        return 0.0
    return max(0.0, (t / math.pi) * math.log(q * t / (2 * math.pi * math.e)))


def _grid_step(t: float, q: int) -> float:
    return 0.5 * math.pi / math.log(q * (abs(t) + 10) / (2 * math.pi) + math.e)


def _z_and_l(chi, t, params):
    lv = l_value(chi, complex(0.5, t), params)
    z = (_rotation_phase(chi, t) * lv.value).real
    return z, lv


def _scan_grid(chi, t_lo, t_hi, params, step_scale=1.0):
    ts = [t_lo]
    t = t_lo
    while t < t_hi:
        t = min(t_hi, t + step_scale * _grid_step(t, chi.modulus))
        ts.append(t)
    zs = [_z_and_l(chi, t, params)[0] for t in ts]
    return ts, zs


def _refine(chi, a, b, za, zb, params):
    """Bisection to near machine width, then secant; returns (gamma, LValue)."""
    for _ in range(64):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if b - a < 1e-14 * max(1.0, abs(m)):
            break
        zm, _ = _z_and_l(chi, m, params)
        if zm == 0.0:
            a = b = m
            break
        if (za < 0) != (zm < 0):
            b, zb = m, zm
        else:
            a, za = m, zm
    g = 0.5 * (a + b)
    z_g, lv = _z_and_l(chi, g, params)
    best_g, best_lv = g, lv
    # secant polish, monitored through |L|
    t0, z0 = a, za
    t1, z1 = g, z_g
    for _ in range(6):
        if abs(best_lv.value) < REFINE_TARGET:
            break
        if z1 == z0:
            break
        t2 = t1 - z1 * (t1 - t0) / (z1 - z0)
        if not (a - 1.0 <= t2 <= b + 1.0):
            break
        z2, lv2 = _z_and_l(chi, t2, params)
        if abs(lv2.value) < abs(best_lv.value):
            best_g, best_lv = t2, lv2
        t0, z0, t1, z1 = t1, z1, t2, z2
    return best_g, best_lv


def _brackets_from_grid(ts, zs):
    out = []
    for i in range(len(ts) - 1):
        if zs[i] == 0.0:
            out.append((max(ts[i] - 1e-9, ts[i] - 1e-9), ts[i] + 1e-9, -1.0, 1.0, ts[i]))
        elif (zs[i] < 0) != (zs[i + 1] < 0):
            out.append((ts[i], ts[i + 1], zs[i], zs[i + 1], None))
    return out


def _warn_even_order(ts, zs):
    mags = sorted(abs(z) for z in zs)
    scale = mags[len(mags) // 2] if mags else 1.0
    tol = 1e-6 * max(1.0, scale)
    for i in range(1, len(ts) - 1):
        if (
            abs(zs[i]) < tol
            and abs(zs[i]) < abs(zs[i - 1])
            and abs(zs[i]) < abs(zs[i + 1])
            and (zs[i - 1] < 0) == (zs[i + 1] < 0)
            and zs[i] != 0.0
        ):
            warnings.warn(
                f"possible multiple/even-order zero near t={ts[i]:.6f}: |Z| dips to "
                f"{abs(zs[i]):.3g} without a sign change",
                RuntimeWarning,
                stacklevel=3,
            )


def _find_side_zeros(chi, t_lo, t_hi, params, step_scale=1.0):
    ts, zs = _scan_grid(chi, t_lo, t_hi, params, step_scale)
    _warn_even_order(ts, zs)
    found = []
    for a, b, za, zb, exact in _brackets_from_grid(ts, zs):
        if exact is not None:
            lv = l_value(chi, complex(0.5, exact), params)
            found.append((exact, lv))
        else:
            found.append(_refine(chi, a, b, za, zb, params))
    return found


def scan_zeros(
    chi: DirichletCharacter, t_max: float, params: EvalParams = DEFAULT_PARAMS
) -> ZeroCache:
    """All zeros with |gamma| <= t_max for a primitive non-principal character."""
    if not chi.is_primitive:
        raise ValueError("zero scan requires a primitive character")
    if chi.is_principal:
        raise ValueError("zero scan requires a non-principal character")
    if not 0 < t_max <= MAX_SCAN_HEIGHT:
        raise ValueError(f"T must be in (0, {MAX_SCAN_HEIGHT}]")

    q = chi.modulus
    if chi.is_real:
        found = _find_side_zeros(chi, 0.0, t_max, params)
    else:
        found = _find_side_zeros(chi, -t_max, t_max, params)

    def dedupe_add(pool, new):
        for g, lv in new:
            if all(abs(g - g0) > MIN_ZERO_GAP for g0, _ in pool):
                pool.append((g, lv))

    # completeness: compare per-unit-window occupancy with the smooth count,
    # rescan suspect windows at a quarter step
    def total_count(pool):
        return 2 * len(pool) if chi.is_real else len(pool)

    def window_deficits(pool):
        occ = {}
        for g, _ in pool:
            occ[int(abs(g))] = occ.get(int(abs(g)), 0) + (2 if chi.is_real else 1)
        bad = []
        for n in range(int(t_max) + 1):
            lo, hi = float(n), min(float(n + 1), t_max)
            if hi <= lo:
                continue
            expected = smooth_zero_count(hi, q) - smooth_zero_count(lo, q)
            if expected - occ.get(n, 0) >= 1.0:
                bad.append(n)
        return bad

    suspects = window_deficits(found)
    for n in suspects:
        lo = max(0.0 if chi.is_real else -t_max, n - 0.3)
        hi = min(t_max, n + 1.3)
        dedupe_add(found, _find_side_zeros(chi, lo, hi, params, step_scale=0.25))
        if not chi.is_real:
            dedupe_add(found, _find_side_zeros(chi, -hi, -lo, params, step_scale=0.25))

    deviation = abs(total_count(found) - smooth_zero_count(t_max, q))
    if deviation > 2 + math.log(q * t_max):
        remaining = window_deficits(found)
        raise MissedZeroError(
            f"possible missed zeros: found {total_count(found)} vs expected "
            f"{smooth_zero_count(t_max, q):.2f} for q={q}, T={t_max}; suspect windows {remaining}",
            windows=remaining,
        )

    records = []
    if chi.is_real:
        pos = sorted(found, key=lambda p: p[0])
        for g, lv in reversed(pos):
            records.append(ZeroRecord(-g, lv.derivative.conjugate(), abs(lv.value)))
        for g, lv in pos:
            records.append(ZeroRecord(g, lv.derivative, abs(lv.value)))
    else:
        for g, lv in sorted(found, key=lambda p: p[0]):
            records.append(ZeroRecord(g, lv.derivative, abs(lv.value)))
    return ZeroCache(q, chi.index, float(t_max), FORMAT_VERSION, tuple(records))


@dataclass(frozen=True)
class CountReport:
    t_scanned: float
    count: int
    expected: float
    deviation: float
    allowed: float
    window_occupancy: dict[int, int]
    window_limit: float
    bad_windows: tuple[int, ...]
    passed: bool


def count_check(cache: ZeroCache) -> CountReport:
    """Compare the cache against the smooth zero count; reporting only."""
    t = cache.t_scanned
    q = cache.q
    expected = smooth_zero_count(t, q)
    deviation = abs(cache.count - expected)
    allowed = 2 + math.log(max(q * t, 1.0))
    occ: dict[int, int] = {}
    for r in cache.records:
        w = int(abs(r.gamma))
        occ[w] = occ.get(w, 0) + 1
    limit = 2 * math.log(max(q * t, math.e))
    bad = tuple(w for w, c in sorted(occ.items()) if c > limit)
    passed = deviation <= allowed and not bad
    return CountReport(t, cache.count, expected, deviation, allowed, occ, limit, bad, passed)


def cache_filename(q: int, chi_index: int) -> str:
    return f"zeros_q{q}_chi{chi_index}.csv"


def store_cache(cache: ZeroCache, path: str) -> None:
    lines = [
        f"# q={cache.q} chi={cache.chi_index} T={fmt_float(cache.t_scanned)} "
        f"count={cache.count} version={cache.version}",
        "gamma,re_lprime,im_lprime,residual",
    ]
    for r in cache.records:
        lines.append(
            f"{fmt_float(r.gamma)},{fmt_float(r.l_prime.real)},"
            f"{fmt_float(r.l_prime.imag)},{fmt_float(r.residual)}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


_HEADER_RE = re.compile(
    r"^# q=(\d+) chi=(\d+) T=([0-9eE+.\-]+) count=(\d+) version=(\S+)\s*$"
)


def load_cache(path: str) -> ZeroCache:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines:
        raise CacheFormatError(f"{path}: empty cache file")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise CacheFormatError(f"{path}: malformed header line {lines[0]!r}")
    q, chi_index, t_scanned, count = int(m.group(1)), int(m.group(2)), float(m.group(3)), int(m.group(4))
    version = m.group(5)
    if version != FORMAT_VERSION:
        raise CacheFormatError(f"{path}: version {version!r} != supported {FORMAT_VERSION!r}")
    if len(lines) < 2 or lines[1] != "gamma,re_lprime,im_lprime,residual":
        raise CacheFormatError(f"{path}: missing column header")
    rows = [ln for ln in lines[2:] if ln.strip()]
    if len(rows) != count:
        raise CacheFormatError(f"{path}: header count {count} but {len(rows)} rows (truncated file?)")
    records = []
    for ln in rows:
        parts = ln.split(",")
        if len(parts) != 4:
            raise CacheFormatError(f"{path}: bad row {ln!r}")
        try:
            g, re_lp, im_lp, resid = (float(p) for p in parts)
        except ValueError as exc:
            raise CacheFormatError(f"{path}: bad row {ln!r}") from exc
        records.append(ZeroRecord(g, complex(re_lp, im_lp), resid))
    for r0, r1 in zip(records, records[1:]):
        if not r1.gamma > r0.gamma:
            raise CacheFormatError(f"{path}: gamma values not strictly increasing")
    return ZeroCache(q, chi_index, t_scanned, version, tuple(records))

import math

import numpy as np
import pytest

from factorrace.characters import enumerate_characters
from factorrace.lfunction import l_value, rotated_z
from factorrace.zeros import (
    CacheFormatError,
    ZeroCache,
    ZeroRecord,
    count_check,
    load_cache,
    scan_zeros,
    smooth_zero_count,
    store_cache,
)
from oracles import bisect_sign_change

FIRST_ZEROS_CHI4 = (6.0209, 10.2437, 12.9880)


def test_chi4_first_zeros(cache15, chi4):
    assert cache15.count == 6
    pos = [r.gamma for r in cache15.records if r.gamma > 0]
    assert len(pos) == 3
    for got, ref in zip(pos, FIRST_ZEROS_CHI4):
        assert abs(got - ref) < 1e-3
    # independent fine-grid bisection oracle around each ordinate
    for got, ref in zip(pos, FIRST_ZEROS_CHI4):
        oracle = bisect_sign_change(lambda t: rotated_z(chi4, t), ref - 0.05, ref + 0.05)
        assert oracle is not None
        assert abs(got - oracle) < 1e-6


def test_chi4_t5_empty(chi4):
    cache = scan_zeros(chi4, 5.0)
    assert cache.count == 0


def test_real_cache_symmetry(cache15):
    gammas = cache15.gammas()
    assert gammas == sorted(gammas)
    by_gamma = {r.gamma: r for r in cache15.records}
    for r in cache15.records:
        assert -r.gamma in by_gamma
        mirror = by_gamma[-r.gamma]
        assert abs(mirror.l_prime - r.l_prime.conjugate()) < 1e-8


def test_records_quality(cache100, chi4):
    gammas = cache100.gammas()
    assert all(b - a > 1e-6 for a, b in zip(gammas, gammas[1:]))
    for r in cache100.records:
        assert r.residual < 1e-9
        assert abs(r.l_prime) > 1e-6  # numerically simple zeros
    # re-verify a subsample independently through the L-evaluator
    for r in cache100.records[::7]:
        assert abs(l_value(chi4, complex(0.5, r.gamma)).value) < 1e-9


def test_pair_sum_real(cache100):
    pos = [r for r in cache100.records if r.gamma > 0]
    for r in pos:
        term = r.l_prime / complex(0.5, r.gamma)
        paired = term + (r.l_prime.conjugate() / complex(0.5, -r.gamma))
        assert abs(paired.imag) < 1e-8


def test_count_check_passes(cache15):
    rep = count_check(cache15)
    assert rep.passed
    assert abs(smooth_zero_count(15.0, 4) - 6.0) < 0.1
    assert rep.deviation <= rep.allowed


def test_count_check_empty_cache_t1(chi4):
    empty = ZeroCache(4, 1, 1.0, "1", ())
    rep = count_check(empty)
    assert rep.passed
    assert rep.expected < 1


def test_count_check_rejects_crowded_window(chi4):
    """More zeros in one unit window than 2*log(qT) allows must fail."""
    fake = tuple(
        ZeroRecord(7.0 + 0.01 * k, complex(1.0, 0.0), 1e-12) for k in range(30)
    )
    rep = count_check(ZeroCache(4, 1, 15.0, "1", fake))
    assert not rep.passed
    assert 7 in rep.bad_windows


def test_count_check_fails_when_record_deleted(chi4):
    cache = scan_zeros(chi4, 50.0)
    # removing an interior pair must push the deviation past the allowance
    reduced = [r for r in cache.records if abs(abs(r.gamma) - cache.records[-1].gamma) > 1e-9]
    pruned = ZeroCache(cache.q, cache.chi_index, cache.t_scanned, cache.version, tuple(reduced))
    base = count_check(cache)
    assert base.passed
    worse = count_check(pruned)
    assert worse.deviation > base.deviation
    # deleting records one by one eventually fails the check
    records = list(cache.records)
    while records:
        records.pop()
        rep = count_check(ZeroCache(cache.q, cache.chi_index, cache.t_scanned, cache.version, tuple(records)))
        if not rep.passed:
            break
    else:
        pytest.fail("count_check never failed even with an empty cache")


def test_cache_roundtrip_bit_exact(tmp_path, cache15):
    path = str(tmp_path / "zc.csv")
    store_cache(cache15, path)
    assert load_cache(path) == cache15


def test_empty_cache_roundtrip(tmp_path, chi4):
    cache = scan_zeros(chi4, 5.0)
    path = str(tmp_path / "empty.csv")
    store_cache(cache, path)
    assert load_cache(path) == cache


def test_cache_parse_errors(tmp_path, cache15):
    path = tmp_path / "zc.csv"
    store_cache(cache15, str(path))
    good = path.read_text().splitlines()

    truncated = tmp_path / "trunc.csv"
    truncated.write_text("\n".join(good[:-1]) + "\n")
    with pytest.raises(CacheFormatError):
        load_cache(str(truncated))

    badheader = tmp_path / "badheader.csv"
    badheader.write_text("# not a header\n" + "\n".join(good[1:]) + "\n")
    with pytest.raises(CacheFormatError):
        load_cache(str(badheader))

    badversion = tmp_path / "badversion.csv"
    badversion.write_text(good[0].replace("version=1", "version=99") + "\n" + "\n".join(good[1:]) + "\n")
    with pytest.raises(CacheFormatError):
        load_cache(str(badversion))

    unsorted = tmp_path / "unsorted.csv"
    rows = good[2:]
    rows[0], rows[1] = rows[1], rows[0]
    unsorted.write_text("\n".join(good[:2] + rows) + "\n")
    with pytest.raises(CacheFormatError):
        load_cache(str(unsorted))


def test_complex_character_scan():
    chi = enumerate_characters(5)[1]
    cache = scan_zeros(chi, 15.0)
    rep = count_check(cache)
    assert rep.passed
    gammas = cache.gammas()
    assert gammas == sorted(gammas)
    # zeros of a complex character are not symmetric about zero
    asym = [g for g in gammas if all(abs(g + h) > 1e-3 for h in gammas)]
    assert asym
    for r in cache.records:
        assert r.residual < 1e-9


def test_scan_domain_errors(chi4):
    principal = enumerate_characters(4)[0]
    with pytest.raises(ValueError):
        scan_zeros(principal, 10.0)
    lifted = next(c for c in enumerate_characters(8) if c.conductor == 4)
    with pytest.raises(ValueError):
        scan_zeros(lifted, 10.0)
    with pytest.raises(ValueError):
        scan_zeros(chi4, 0.0)
    with pytest.raises(ValueError):
        scan_zeros(chi4, 1001.0)


def test_window_refinement_recovers_coarse_grid(chi4, monkeypatch):
    """A 4x-coarse first pass drops sign changes; the per-window deficit
    rescan at a quarter step must recover them."""
    import factorrace.zeros as zmod

    orig = zmod._grid_step
    monkeypatch.setattr(zmod, "_grid_step", lambda t, q: 4.0 * orig(t, q))
    coarse = scan_zeros(chi4, 30.0)
    monkeypatch.undo()
    fine = scan_zeros(chi4, 30.0)
    assert coarse.count == fine.count
    for a, b in zip(coarse.gammas(), fine.gammas()):
        assert abs(a - b) < 1e-6


def test_missed_zero_error_raised(chi4, monkeypatch):
    import factorrace.zeros as zmod
    from factorrace.zeros import MissedZeroError

    monkeypatch.setattr(zmod, "smooth_zero_count", lambda t, q: 50.0)
    with pytest.raises(MissedZeroError):
        scan_zeros(chi4, 15.0)

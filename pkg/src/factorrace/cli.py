"""Command-line pipeline: sieve -> zeros -> compare -> density.

Subcommands write plain CSV files into the output directory; every file
carries a comment header with a hash of the resolved configuration, so a
file can always be traced back to the run that produced it.  Outputs are
byte-identical given the same configuration and seed: no timestamps, fixed
float formatting, deterministic merge order regardless of thread count
(the hash therefore excludes the output path and the thread count).

Exit codes: 0 ok, 2 configuration error, 3 numeric verification failure
(zero-count consistency), 4 I/O or missing-input error.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from dataclasses import dataclass, replace

from . import __version__
from .characters import DirichletCharacter, enumerate_characters
from .density import build_model, li_monte_carlo, report, write_density_csv, write_mc_csv
from .lfunction import l_value
from .prediction import (
    KINDS,
    figure_table,
    predict,
    residual_series,
    write_compare_csv,
    write_meansq_csv,
)
from .sieve import SieveConfig, combined_run, density_scan, sieve_run, write_checkpoints_csv, write_twists_csv
from .zeros import (
    MissedZeroError,
    cache_filename,
    count_check,
    load_cache,
    scan_zeros,
    store_cache,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


class MissingInputError(OSError):
    pass


@dataclass(frozen=True)
class RunConfig:
    x_max: int = 10**6
    q: int = 4
    chi: str = "all"  # "all" or an index
    kinds: tuple[str, ...] = ("omega", "Omega")
    t_scan: float = 50.0
    t0_list: tuple[float, ...] = (50.0,)
    ratio: float = 1.02
    segment_size: int = 1 << 20
    out: str = "out"
    seed: int = 42
    threads: int = 1
    trials: int = 10_000

    def hash(self) -> str:
        # excludes `out` and `threads`: results must not depend on either
        canon = "|".join(
            [
                f"xmax={self.x_max}",
                f"q={self.q}",
                f"chi={self.chi}",
                f"kinds={','.join(self.kinds)}",
                f"T={self.t_scan!r}",
                f"T0={','.join(repr(t) for t in self.t0_list)}",
                f"ratio={self.ratio!r}",
                f"segment={self.segment_size}",
                f"seed={self.seed}",
                f"version={__version__}",
            ]
        )
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def comment(self) -> str:
        return f"config={self.hash()} version={__version__}"


_CONFIG_KEYS = {
    "xmax": ("x_max", int),
    "q": ("q", int),
    "chi": ("chi", str),
    "kind": ("kinds", lambda s: tuple(s.split(","))),
    "T": ("t_scan", float),
    "T0": ("t0_list", lambda s: tuple(float(v) for v in s.split(","))),
    "ratio": ("ratio", float),
    "segment_size": ("segment_size", int),
    "out": ("out", str),
    "seed": ("seed", int),
    "threads": ("threads", int),
    "trials": ("trials", int),
}


def _read_config_file(path: str) -> dict:
    updates = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
                key, val = (part.strip() for part in line.split("=", 1))
                if key not in _CONFIG_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                field, conv = _CONFIG_KEYS[key]
                try:
                    updates[field] = conv(val)
                except ValueError as exc:
                    raise ConfigError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    except OSError as exc:
        raise MissingInputError(f"cannot read config file {path}: {exc}") from exc
    return updates


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    rc = RunConfig()
    if args.config:
        rc = replace(rc, **_read_config_file(args.config))
    overrides = {}
    for flag, field, conv in [
        ("xmax", "x_max", int),
        ("q", "q", int),
        ("chi", "chi", str),
        ("kind", "kinds", lambda v: tuple(v)),
        ("T", "t_scan", float),
        ("T0", "t0_list", lambda v: tuple(float(x) for x in v)),
        ("ratio", "ratio", float),
        ("segment_size", "segment_size", int),
        ("out", "out", str),
        ("seed", "seed", int),
        ("threads", "threads", int),
        ("trials", "trials", int),
    ]:
        val = getattr(args, flag, None)
        if val is not None:
            overrides[field] = conv(val)
    rc = replace(rc, **overrides)
    _validate(rc)
    return rc


def _validate(rc: RunConfig) -> None:
    if rc.threads < 1:
        raise ConfigError("threads must be >= 1")
    if rc.trials < 1000:
        raise ConfigError("trials must be >= 1000")
    for kind in rc.kinds:
        if kind not in KINDS:
            raise ConfigError(f"kind must be in {KINDS}, got {kind!r}")
    if rc.chi != "all":
        try:
            int(rc.chi)
        except ValueError:
            raise ConfigError(f"--chi must be 'all' or an integer index, got {rc.chi!r}") from None
    if not rc.t0_list:
        raise ConfigError("at least one T0 is required")
    if max(rc.t0_list) > rc.t_scan:
        raise ConfigError(f"every T0 must be <= T={rc.t_scan}")
    try:
        _sieve_config(rc)
        _characters(rc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _sieve_config(rc: RunConfig) -> SieveConfig:
    return SieveConfig(x_max=rc.x_max, q=rc.q, segment_size=rc.segment_size, ratio=rc.ratio)


def _characters(rc: RunConfig) -> list[DirichletCharacter]:
    chars = enumerate_characters(rc.q)
    if rc.chi == "all":
        return chars
    idx = int(rc.chi)
    if not 0 <= idx < len(chars):
        raise ConfigError(f"character index {idx} out of range [0, {len(chars)}) for q={rc.q}")
    return [chars[idx]]


def _zero_targets(rc: RunConfig) -> list[DirichletCharacter]:
    targets = [c for c in _characters(rc) if c.is_primitive and not c.is_principal]
    if rc.chi != "all" and not targets:
        raise ConfigError(f"character (q={rc.q}, chi={rc.chi}) is not primitive non-principal")
    return targets


def _density_targets(rc: RunConfig) -> list[DirichletCharacter]:
    return [c for c in _characters(rc) if c.is_real and not c.is_principal]


def _path(rc: RunConfig, name: str) -> str:
    return os.path.join(rc.out, name)


def cmd_sieve(rc: RunConfig, sums=None) -> None:
    cfg = _sieve_config(rc)
    if sums is None:
        sums = sieve_run(cfg, threads=rc.threads)
    write_checkpoints_csv(sums, _path(rc, "checkpoints.csv"), rc.comment())
    write_twists_csv(sums, _characters(rc), _path(rc, "twists.csv"), rc.comment())
    print(f"sieve: x_max={rc.x_max} q={rc.q} checkpoints={len(sums.checkpoints)} -> {rc.out}")


def cmd_zeros(rc: RunConfig) -> dict[int, "object"]:
    caches = {}
    for chi in _zero_targets(rc):
        path = _path(rc, cache_filename(rc.q, chi.index))
        cache = None
        if os.path.exists(path):
            try:
                existing = load_cache(path)
                if (
                    existing.q == rc.q
                    and existing.chi_index == chi.index
                    and existing.t_scanned == float(rc.t_scan)
                ):
                    cache = existing
                    print(f"zeros: q={rc.q} chi={chi.index} T={rc.t_scan} cached ({cache.count} zeros)")
            except ValueError:
                cache = None
        if cache is None:
            cache = scan_zeros(chi, rc.t_scan)
            rep = count_check(cache)
            if not rep.passed:
                raise MissedZeroError(
                    f"zero-count check failed for q={rc.q} chi={chi.index}: "
                    f"count={rep.count} expected={rep.expected:.2f} deviation={rep.deviation:.2f} "
                    f"allowed={rep.allowed:.2f} bad_windows={rep.bad_windows}",
                    windows=list(rep.bad_windows),
                )
            store_cache(cache, path)
            print(f"zeros: q={rc.q} chi={chi.index} T={rc.t_scan} -> {cache.count} zeros")
        caches[chi.index] = cache
    return caches


def _read_twists(rc: RunConfig) -> dict[int, list[tuple[int, complex, complex]]]:
    """twists.csv rows keyed by character index: (x, psi_omega, psi_Omega)."""
    path = _path(rc, "twists.csv")
    if not os.path.exists(path):
        raise MissingInputError(
            f"{path} not found: run the `sieve` subcommand first (factorrace sieve ...)"
        )
    out: dict[int, list[tuple[int, complex, complex]]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("x,"):
                continue
            x, _q, idx, rw, iw, rb, ib = line.strip().split(",")
            out.setdefault(int(idx), []).append(
                (int(x), complex(float(rw), float(iw)), complex(float(rb), float(ib)))
            )
    return out


def cmd_compare(rc: RunConfig) -> None:
    twists = _read_twists(rc)
    meansq_groups = []
    for chi in _zero_targets(rc):
        path = _path(rc, cache_filename(rc.q, chi.index))
        if not os.path.exists(path):
            raise MissingInputError(
                f"{path} not found: run the `zeros` subcommand first (factorrace zeros ...)"
            )
        cache = load_cache(path)
        if max(rc.t0_list) > cache.t_scanned:
            raise ConfigError(
                f"T0 up to {max(rc.t0_list)} requested but cache holds T={cache.t_scanned}; "
                f"rerun `zeros` with a larger --T"
            )
        l_half = l_value(chi, 0.5)
        rows_for_chi = twists.get(chi.index, [])
        xs = [x for x, _, _ in rows_for_chi if x >= 2]
        psi = {
            "omega": [w for x, w, _ in rows_for_chi if x >= 2],
            "Omega": [b for x, _, b in rows_for_chi if x >= 2],
        }
        for kind in rc.kinds:
            entries = []
            for t0 in rc.t0_list:
                preds = [predict(x, chi, kind, l_half, cache, t0) for x in xs]
                rows = figure_table(xs, psi[kind], preds)
                name = f"compare_{kind}_q{rc.q}_chi{chi.index}_T{_fmt_t0(t0)}.csv"
                write_compare_csv(rows, _path(rc, name), rc.comment())
                series = residual_series(xs, psi[kind], preds)
                if len(series.y) >= 2:
                    entries.append((t0, float(series.y[-1]), series.mean_square))
            if entries:
                meansq_groups.append((f"kind={kind} q={rc.q} chi={chi.index}", entries))
        print(f"compare: q={rc.q} chi={chi.index} kinds={','.join(rc.kinds)} T0s={rc.t0_list}")
    write_meansq_csv(meansq_groups, _path(rc, "meansq.csv"), rc.comment())


def _fmt_t0(t0: float) -> str:
    return str(int(t0)) if float(t0).is_integer() else str(t0)


def _mc_y_grid(cfg: SieveConfig) -> list[float]:
    xs = [x for x in cfg.checkpoints if x >= 2]
    if len(xs) > 40:
        step = len(xs) // 40 + 1
        xs = xs[::step] + ([xs[-1]] if xs[-1] not in xs[::step] else [])
    return [math.log(x) for x in xs]


def cmd_density(rc: RunConfig, precomputed: dict[int, object] | None = None) -> None:
    cfg = _sieve_config(rc)
    targets = _density_targets(rc)
    if not targets:
        raise ConfigError(f"no real non-principal character selected for q={rc.q} chi={rc.chi}")
    traces = []
    estimates = []
    for chi in targets:
        if precomputed and chi.index in precomputed:
            dens = precomputed[chi.index]
        else:
            dens = density_scan(cfg, chi, threads=rc.threads)
        traces.append(dens)
        if chi.is_primitive:
            path = _path(rc, cache_filename(rc.q, chi.index))
            if not os.path.exists(path):
                raise MissingInputError(
                    f"{path} not found: run the `zeros` subcommand first (factorrace zeros ...)"
                )
            cache = load_cache(path)
            l_half = l_value(chi, 0.5)
            t0 = min(max(rc.t0_list), cache.t_scanned)
            y_grid = _mc_y_grid(cfg)
            for kind in rc.kinds:
                model = build_model(chi, l_half, cache, t0, kind, rc.seed)
                estimates.append(li_monte_carlo(model, y_grid, rc.trials))
            rep = report(
                dens,
                next((m for m in estimates if m.kind == "omega"), None),
                next((m for m in estimates if m.kind == "Omega"), None),
            )
            flags = []
            if rep.flag_omega:
                flags.append("omega")
            if rep.flag_big_omega:
                flags.append("Omega")
            if flags:
                print(f"density: WARNING empirical vs Monte Carlo disagree (> 0.1) for {flags}")
        print(
            f"density: q={rc.q} chi={chi.index} X={rc.x_max} "
            f"delta_omega={dens.delta_omega:.4f} delta_Omega={dens.delta_big_omega:.4f}"
        )
    write_density_csv(traces[0], _path(rc, "density.csv"), rc.comment())
    write_mc_csv(estimates, _path(rc, "mc.csv"), rc.comment())


def cmd_all(rc: RunConfig) -> None:
    cfg = _sieve_config(rc)
    targets = _density_targets(rc)
    dens_map = {}
    if targets:
        first = targets[0]
        sums, dens = combined_run(cfg, first, threads=rc.threads)
        dens_map[first.index] = dens
        for chi in targets[1:]:
            dens_map[chi.index] = density_scan(cfg, chi, threads=rc.threads)
    else:
        sums = sieve_run(cfg, threads=rc.threads)
    cmd_sieve(rc, sums=sums)
    cmd_zeros(rc)
    cmd_compare(rc)
    if targets:
        cmd_density(rc, precomputed=dens_map)


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factorrace",
        description="Prime-factor counting races: sieve, L-function zeros, "
        "explicit-formula comparison and sign-bias densities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("sieve", "run the factor sieve; write checkpoints.csv and twists.csv"),
        ("zeros", "scan critical-line zeros; write zeros_q*_chi*.csv caches"),
        ("compare", "explicit-formula comparison; write compare_*.csv and meansq.csv"),
        ("density", "sign-bias densities; write density.csv and mc.csv"),
        ("all", "full pipeline: sieve, zeros, compare, density"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--xmax", type=int, help="sieve ceiling x_max")
        p.add_argument("--q", type=int, help="modulus")
        p.add_argument("--chi", help="character index or 'all'")
        p.add_argument("--kind", action="append", choices=KINDS, help="race kind (repeatable)")
        p.add_argument("--T", type=float, dest="T", help="zero-scan height")
        p.add_argument("--T0", type=float, action="append", dest="T0", help="zero-sum truncation (repeatable)")
        p.add_argument("--ratio", type=float, help="checkpoint grid ratio")
        p.add_argument("--segment-size", type=int, dest="segment_size", help="sieve segment size")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="Monte Carlo seed")
        p.add_argument("--threads", type=int, help="worker threads")
        p.add_argument("--trials", type=int, help="Monte Carlo trials")
    return parser


_COMMANDS = {
    "sieve": cmd_sieve,
    "zeros": cmd_zeros,
    "compare": cmd_compare,
    "density": cmd_density,
    "all": cmd_all,
}


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        rc = _build_run_config(args)
        os.makedirs(rc.out, exist_ok=True)
        _COMMANDS[args.command](rc)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissedZeroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MissingInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

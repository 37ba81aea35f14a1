"""Logarithmic-density estimation for the biased sign sets.

Empirically, the density of a threshold set S is estimated by

    delta_hat(S)(X) = (1/log X) * sum_{n <= X, n in S} 1/n,

with S the thresholds where the running twisted sum is negative (omega
race) or positive (Omega race); the sieve module supplies those harmonic
measures exactly.

The model-based estimate assumes the positive zero ordinates are linearly
independent over Q, so the phases (gamma * y mod 2pi) equidistribute: the
normalized oscillation is replaced by X = sum_gamma A_gamma * cos(U_gamma)
with iid uniform phases and amplitudes A_gamma = 2|L'(rho)/(1/2+i gamma)|,
truncated at T0 (a declared model error).  In the log^2 x / sqrt(x)
normalization the secular part grows linearly in y = log x,

    drift(y) = a(chi) * (L(1/2) * y + 2 L(1/2) - L'(1/2)),

while the oscillation stays bounded, which is what drives the densities
toward 1.  The Monte Carlo estimates P[-drift(y) + X < 0] for the omega
race and the mirrored P[drift(y) + X > 0] for the Omega race.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._csvio import atomic_write_text, fmt_float
from .characters import DirichletCharacter
from .lfunction import LValue
from .sieve import DensityTrace
from .zeros import ZeroCache

__all__ = [
    "LiModel",
    "MonteCarloEstimates",
    "DensityReport",
    "build_model",
    "li_monte_carlo",
    "report",
    "write_density_csv",
    "write_mc_csv",
]

MIN_TRIALS = 1000
DISAGREE_TOL = 0.1


@dataclass(frozen=True)
class LiModel:
    """Random-phase surrogate: amplitudes from zeros up to T0 plus linear drift."""

    amplitudes: tuple[float, ...]
    drift_slope: float
    drift_intercept: float
    kind: str
    seed: int
    t0: float

    def drift(self, y: float) -> float:
        return self.drift_slope * y + self.drift_intercept


def build_model(
    chi: DirichletCharacter,
    l_half: LValue,
    cache: ZeroCache,
    t0: float,
    kind: str,
    seed: int,
) -> LiModel:
    if kind not in ("omega", "Omega"):
        raise ValueError(f"kind must be 'omega' or 'Omega', got {kind!r}")
    if (cache.q, cache.chi_index) != (chi.modulus, chi.index):
        raise ValueError("zero cache does not belong to this character")
    a_chi = 1 if chi.is_real else 0
    amps = tuple(
        2.0 * abs(rec.l_prime / complex(0.5, rec.gamma))
        for rec in cache.select(t0)
        if rec.gamma > 0
    )
    slope = a_chi * l_half.value.real
    intercept = a_chi * (2 * l_half.value - l_half.derivative).real
    return LiModel(amps, slope, intercept, kind, seed, float(t0))


@dataclass(frozen=True)
class MonteCarloEstimates:
    kind: str
    trials: int
    seed: int
    points: tuple[tuple[float, float, float], ...]  # (y, p_hat, std_error)


def li_monte_carlo(
    model: LiModel, y_grid, trials: int, rng: np.random.Generator | None = None
) -> MonteCarloEstimates:
    """Bias probability of the race at each y, under the random-phase model.

    One set of phase samples is drawn per call and reused across the y grid;
    each marginal estimate is unbiased and the whole result is reproducible
    from the seed.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}")
    if not model.amplitudes and model.drift_slope == 0 and model.drift_intercept == 0:
        raise ValueError("degenerate model: no oscillation amplitudes and zero drift")
    if rng is None:
        rng = np.random.default_rng(model.seed)
    if model.amplitudes:
        amps = np.asarray(model.amplitudes)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=(trials, len(amps)))
        osc = np.cos(phases) @ amps
    else:
        osc = np.zeros(trials)
    points = []
    for y in y_grid:
        d = model.drift(float(y))
        if model.kind == "omega":
            p = float(np.count_nonzero(osc < d)) / trials  # -drift + X < 0
        else:
            p = float(np.count_nonzero(osc > -d)) / trials  # drift + X > 0
        se = math.sqrt(p * (1.0 - p) / trials)
        points.append((float(y), p, se))
    return MonteCarloEstimates(model.kind, trials, model.seed, tuple(points))


@dataclass(frozen=True)
class DensityReport:
    """Empirical and model densities side by side, with a disagreement flag."""

    x_max: int | None
    delta_omega: float | None
    delta_big_omega: float | None
    mc_omega: MonteCarloEstimates | None
    mc_big_omega: MonteCarloEstimates | None
    flag_omega: bool | None
    flag_big_omega: bool | None


def _mc_mean(mc: MonteCarloEstimates, y_max: float) -> float:
    ps = [p for y, p, _ in mc.points if y <= y_max + 1e-9]
    if not ps:
        ps = [p for _, p, _ in mc.points]
    return sum(ps) / len(ps)


def report(
    empirical: DensityTrace | None,
    mc_omega: MonteCarloEstimates | None = None,
    mc_big_omega: MonteCarloEstimates | None = None,
) -> DensityReport:
    """Merge the sieve estimate and the Monte Carlo estimate for one character."""
    x_max = empirical.x_max if empirical is not None else None
    d_w = empirical.delta_omega if empirical is not None else None
    d_W = empirical.delta_big_omega if empirical is not None else None
    y_max = math.log(x_max) if x_max and x_max > 1 else float("inf")

    def flag(delta, mc):
        if delta is None or mc is None:
            return None
        return abs(delta - _mc_mean(mc, y_max)) > DISAGREE_TOL

    return DensityReport(
        x_max=x_max,
        delta_omega=d_w,
        delta_big_omega=d_W,
        mc_omega=mc_omega,
        mc_big_omega=mc_big_omega,
        flag_omega=flag(d_w, mc_omega),
        flag_big_omega=flag(d_W, mc_big_omega),
    )


def write_density_csv(trace: DensityTrace, path: str, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("X,delta_omega,delta_Omega")
    for x, dw, dW in trace.trace:
        lines.append(f"{x},{fmt_float(dw)},{fmt_float(dW)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_mc_csv(estimates: list[MonteCarloEstimates], path: str, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("y,p_neg,trials,seed,kind")
    for mc in estimates:
        for y, p, _ in mc.points:
            lines.append(f"{fmt_float(y)},{fmt_float(p)},{mc.trials},{mc.seed},{mc.kind}")
    atomic_write_text(path, "\n".join(lines) + "\n")

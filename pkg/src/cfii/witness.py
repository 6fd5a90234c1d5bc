"""Path witnesses, classical benchmarks, and chain gain ratios.

The central quantity is the path witness

    V = 1/F_ab - 1/F_ac - 1/F_cb,

built from the end-to-end Fisher information F_ab and the two segment
informations F_ac, F_cb of a split protocol.  Any classical (sequential,
signaling-free) realization obeys V >= 0: inverse Fisher information adds
like series resistance along a causal chain.  V < 0 therefore witnesses a
resource beyond the classical path composition, with the improvement factor
R_cl / (R_cl + V) quantifying how far past the frontier the protocol sits.

The K-segment generalization sums the chain resistances, the split-optimized
benchmark maximizes the harmonic composition over the intermediate time, and
`gamma_crossing` locates the dephasing rate at which the chain advantage
Gamma_K drops to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import (DegenerateBenchmarkError, NoCrossingError,
                     NonPositiveFiError, OptimizationError)
from .models import (BinaryModel, NoisyFringeModel, NoisyFringeParams,
                     QubitFringeModel, QubitPreparation)

# Segment FIs below this are treated as dead when maximizing over splits.
SPLIT_FI_FLOOR = 1e-12


@dataclass(frozen=True)
class WitnessReport:
    """Witness value and the quantities it was built from."""

    v: float
    f_end: float
    f_benchmark: float
    gamma_ratio: float
    g_indicator: float
    f_segments: tuple[float, ...]
    segments: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.f_segments)


def v_path(f_ab: float, f_ac: float, f_cb: float) -> float:
    """Path witness 1/f_ab - 1/f_ac - 1/f_cb; negative values are
    unreachable by classical split protocols."""
    _require_positive(f_ab=f_ab, f_ac=f_ac, f_cb=f_cb)
    return 1.0 / f_ab - 1.0 / f_ac - 1.0 / f_cb


def v_chain(f_end: float, f_segments: Sequence[float]) -> float:
    """Chain witness 1/f_end - sum_j 1/f_j over the segment informations."""
    if len(f_segments) == 0:
        raise ValueError("need at least one segment")
    _require_positive(f_end=f_end)
    _require_positive(**{f"f_segment_{j}": f for j, f in enumerate(f_segments)})
    return 1.0 / f_end - float(np.sum(1.0 / np.asarray(f_segments, dtype=float)))


def classical_benchmark_path(f_ac: float, f_cb: float) -> float:
    """Harmonic composition (1/f_ac + 1/f_cb)^(-1): the best end-to-end FI a
    classical two-segment protocol can reach."""
    _require_positive(f_ac=f_ac, f_cb=f_cb)
    return 1.0 / (1.0 / f_ac + 1.0 / f_cb)


def gain_indicator(f_end: float, f_benchmark: float) -> float:
    """Log error-ratio G = (1/2) ln(f_benchmark / f_end); G < 0 exactly when
    the protocol beats the classical benchmark."""
    _require_positive(f_end=f_end, f_benchmark=f_benchmark)
    return 0.5 * math.log(f_benchmark / f_end)


def improvement_factor(v: float, r_cl: float) -> float:
    """Resistance ratio r_cl / (r_cl + v) comparing classical and achieved
    end-to-end information resistances."""
    if r_cl <= 0.0:
        raise NonPositiveFiError(f"classical resistance must be > 0, got {r_cl}")
    if r_cl + v <= 0.0:
        raise DegenerateBenchmarkError(
            f"achieved resistance r_cl + v = {r_cl + v} is not positive")
    return r_cl / (r_cl + v)


def split_optimized_benchmark(model: BinaryModel,
                              theta_total: float) -> tuple[float, float]:
    """Maximize the harmonic benchmark over the split point.

    Scans a 512-point coarse grid of split fractions, refines the best
    bracket to 1e-8 interval width, and breaks near-flat ties (within a
    relative 1e-9, absorbing FI roundoff near fringe extremes) toward the
    symmetric split lambda = 0.5.  Returns (benchmark FI, lambda_star).
    """
    if theta_total <= 0.0:
        raise ValueError(f"theta_total must be > 0, got {theta_total}")

    def benchmark(lam: float) -> float:
        f1 = float(model.fi(lam * theta_total))
        f2 = float(model.fi((1.0 - lam) * theta_total))
        if f1 < SPLIT_FI_FLOOR or f2 < SPLIT_FI_FLOOR:
            return 0.0
        return 1.0 / (1.0 / f1 + 1.0 / f2)

    grid = (np.arange(512) + 0.5) / 512.0
    values = np.array([benchmark(lam) for lam in grid])
    best = int(np.argmax(values))
    if values[best] <= 0.0:
        raise OptimizationError(
            "segment FI vanishes for every scanned split; no benchmark exists")

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, 511)]
    res = optimize.minimize_scalar(lambda lam: -benchmark(lam),
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-9})
    lam_star = float(res.x)
    f_star = benchmark(lam_star)
    if values[best] > f_star:
        lam_star, f_star = float(grid[best]), float(values[best])
    # Flat objective (constant-FI model): prefer the symmetric split.  The
    # 1e-9 band absorbs the 1 - z^2 cancellation noise of near-extremal
    # fringe points, which would otherwise win the argmax by ~1e-11.
    if abs(benchmark(0.5) - f_star) <= 1e-9 * max(1.0, abs(f_star)):
        lam_star, f_star = 0.5, benchmark(0.5)
    return f_star, lam_star


def k_chain_gain(model: BinaryModel, theta_total: float, k: int,
                 partition: str = "equal") -> WitnessReport:
    """Chain witness report for a K-segment protocol of total angle
    theta_total.  Each segment context runs the same model for its segment
    length from a fresh preparation.

    partition="equal" uses K equal segments; partition="optimized" is
    available for k=2 and maximizes the benchmark over the split point.
    """
    if k < 2:
        raise ValueError(f"chain needs k >= 2 segments, got {k}")
    if theta_total <= 0.0:
        raise ValueError(f"theta_total must be > 0, got {theta_total}")

    if partition == "equal":
        segments = tuple(theta_total / k for _ in range(k))
    elif partition == "optimized":
        if k != 2:
            raise ValueError("optimized partitions are supported for k=2 only")
        _, lam = split_optimized_benchmark(model, theta_total)
        segments = (lam * theta_total, (1.0 - lam) * theta_total)
    else:
        raise ValueError(f"unknown partition {partition!r}")

    f_end = float(model.fi(theta_total))
    f_segments = tuple(float(model.fi(seg)) for seg in segments)
    v = v_chain(f_end, f_segments)
    f_benchmark = 1.0 / float(np.sum(1.0 / np.asarray(f_segments)))
    return WitnessReport(
        v=v,
        f_end=f_end,
        f_benchmark=f_benchmark,
        gamma_ratio=f_end / f_benchmark,
        g_indicator=gain_indicator(f_end, f_benchmark),
        f_segments=f_segments,
        segments=segments,
    )


def gamma_crossing(base: NoisyFringeParams, t_total: float, k: int,
                   gamma_range: tuple[float, float] = (0.0, 2.0),
                   family: Callable[[float], BinaryModel] | None = None) -> float:
    """Dephasing rate gamma_star at which the chain gain Gamma_K(gamma)
    crosses 1.

    Scans 64 bracketing points over gamma_range, then solves
    Gamma_K(gamma) = 1 inside the first sign-change bracket to better than
    1e-6 in gamma.  `family` may override how a model is built from gamma
    (defaults to the noisy fringe with `base`'s eps_r and vartheta0).
    """
    if k < 2:
        raise ValueError(f"chain needs k >= 2 segments, got {k}")
    if family is None:
        def family(gamma: float) -> BinaryModel:
            return NoisyFringeModel(NoisyFringeParams(
                gamma=gamma, epsilon_r=base.epsilon_r,
                vartheta0=base.vartheta0))

    def excess(gamma: float) -> float:
        m = family(gamma)
        return float(m.fi(t_total)) * k / float(m.fi(t_total / k)) - 1.0

    lo, hi = gamma_range
    grid = np.linspace(lo, hi, 64)
    vals = np.array([excess(g) for g in grid])
    if vals[0] <= 0.0:
        raise NoCrossingError("Gamma_K does not start above 1 at gamma = "
                              f"{lo}")
    sign_change = np.nonzero(vals[:-1] * vals[1:] <= 0.0)[0]
    if sign_change.size == 0:
        raise NoCrossingError(
            f"Gamma_K stays above 1 on [{lo}, {hi}]; no crossing")
    i = int(sign_change[0])
    return float(optimize.brentq(excess, grid[i], grid[i + 1], xtol=1e-8))


def nsit_separation_demo(grid_points: int = 1000) -> tuple[bool, float]:
    """Constant-FI fringe that satisfies no-signaling-in-time yet violates
    every path witness maximally.

    Builds the family p0(theta) = cos^2(theta/2) and a second measurement
    context in which an outcome-blind coin is tossed first and then
    marginalized out, so both contexts share identical marginals by
    construction.  Checks marginal equality on a theta grid, that the
    family's FI is 1 everywhere, and that V = -1 for every nontrivial
    split.  Returns (nsit_holds, witness value).
    """
    model = QubitFringeModel(QubitPreparation(vartheta=0.0, varphi=math.pi / 2))
    thetas = np.linspace(0.0, 2.0 * math.pi, grid_points)

    p_direct = model.p0(thetas)
    # Context with an interposed blind measurement: joint over (a, b) with a
    # fair parameter-independent coin, marginalized over a.
    p_joint = 0.5 * model.p0(thetas) + 0.5 * model.p0(thetas)
    nsit_holds = bool(np.max(np.abs(p_joint - p_direct)) < 1e-14)

    fi = model.fi(thetas)
    nsit_holds = nsit_holds and bool(np.max(np.abs(fi - 1.0)) < 1e-10)

    splits = np.linspace(0.1, 2.0 * math.pi - 0.1, 101)
    total = 2.0 * math.pi - 0.05
    witnesses = [
        v_path(float(model.fi(total)), float(model.fi(s)),
               float(model.fi(total - s)))
        for s in splits if 0.0 < s < total
    ]
    v = float(np.median(witnesses))
    nsit_holds = nsit_holds and bool(
        np.max(np.abs(np.asarray(witnesses) + 1.0)) < 1e-10)
    return nsit_holds, v


def _require_positive(**named: float) -> None:
    for name, value in named.items():
        if not value > 0.0:
            raise NonPositiveFiError(f"{name} must be > 0, got {value}")

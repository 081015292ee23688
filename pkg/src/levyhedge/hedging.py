"""Hedging strategies and the model-independent bounds on their distance.

Both strategies are functions of moneyness chi = K / S alone:

    LRM(chi)   = (sigma^2 I1(1,chi) + I2(1,chi)) / (sigma^2 + C2)
    Delta(chi) = I1(1,chi)

and |LRM - Delta| admits two computable upper bounds: one tight for small
chi (linear in chi, driven by C2- and the lower tail probability) and one
of order 1/chi for large chi (an explicit constant involving the
condition integral of |phi(v - 2i)|/(1+v)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .fourier import (
    CharFn,
    ConditionIntegral,
    FourierConfig,
    FourierResult,
    MODE_FFT,
    batch,
    theorem4_condition_integral,
    transform,
)
from .levy_core import DivergenceError, LevyIntegrabilityError, MmmModel, StripError

__all__ = [
    "StrategyPoint",
    "lrm",
    "delta",
    "bound_t3",
    "bound_t4",
    "bound_t4_constant",
    "strategy_point",
    "strategy_point_for_strike",
    "sweep",
]

# invariant slack: bounds are exact mathematics, only quadrature error can
# break them, so violations are tolerated up to this multiple of the
# reported error estimate
SLACK_FACTOR = 10.0


@dataclass(frozen=True)
class StrategyPoint:
    """Per-moneyness record of both strategies, their distance, and bounds."""

    chi: float
    i1: float
    i2: float
    lrm: float
    delta: float
    diff: float
    bound_t3: float
    bound_t4: Optional[float]
    err_est: float
    flags: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not any(f.endswith("violation") for f in self.flags)


def lrm(model: MmmModel, phi: CharFn, chi: float, cfg: FourierConfig) -> float:
    """Locally risk-minimizing position in the risky asset at unit spot."""
    v1 = transform("i1", phi, chi, cfg).value
    v2 = transform("i2", phi, chi, cfg, model=model).value
    return (model.sigma**2 * v1 + v2) / (model.sigma**2 + model.c2)


def delta(phi: CharFn, chi: float, cfg: FourierConfig) -> float:
    """Delta hedge under the MMM: the spot derivative of the call price."""
    return transform("i1", phi, chi, cfg).value


def bound_t3(model: MmmModel, phi: CharFn, chi: float,
             cfg: FourierConfig) -> float:
    """Small-moneyness bound on |LRM - Delta|:

        chi * [ (1 - p_low) C2- + p_low C2+ ] / (sigma^2 + C2),

    with p_low = p*((-inf, log chi]).  Linear in chi as chi -> 0.
    """
    res = transform("tail", phi, chi, cfg)
    p_low = 1.0 - res.value
    p_low = min(max(p_low, 0.0), 1.0)
    num = (1.0 - p_low) * model.c2_minus + p_low * model.c2_plus
    return chi * num / (model.sigma**2 + model.c2)


def bound_t4_constant(model: MmmModel, phi: CharFn, cfg: FourierConfig,
                      condition: Optional[ConditionIntegral] = None) -> Optional[float]:
    """Constant of the large-moneyness bound (the bound itself is const/chi):

        sqrt(5) / (2 pi (sigma^2 + C2)) * integral |phi(v-2i)|/(1+v) dv
            * [ C2- + integral_0^inf e^{2x} (e^x - 1)^2 nu(dx) ]

    Returns None when the condition integral diverges (possible only for
    sigma = 0).
    """
    if condition is None:
        try:
            condition = theorem4_condition_integral(phi, cfg)
        except DivergenceError:
            return None
    g = model.measure.exp_moment
    try:
        brace_moment = (g(4.0, "pos") - 2.0 * g(3.0, "pos") + g(2.0, "pos")).real
    except StripError as exc:
        raise LevyIntegrabilityError(
            f"the e^{{2x}} (e^x-1)^2 moment diverges: {exc}") from exc
    brace = model.c2_minus + brace_moment
    return (math.sqrt(5.0) / (2.0 * math.pi * (model.sigma**2 + model.c2))
            * condition.total * brace)


def bound_t4(model: MmmModel, phi: CharFn, chi: float,
             cfg: FourierConfig) -> Optional[float]:
    """Large-moneyness bound at one point, or None when inadmissible."""
    const = bound_t4_constant(model, phi, cfg)
    return None if const is None else const / chi


def _assemble_point(model: MmmModel, chi: float, r1: FourierResult,
                    r2: FourierResult, rt: FourierResult,
                    t4_const: Optional[float]) -> StrategyPoint:
    s2c2 = model.sigma**2 + model.c2
    lrm_v = (model.sigma**2 * r1.value + r2.value) / s2c2
    delta_v = r1.value
    diff = abs(lrm_v - delta_v)
    p_low = min(max(1.0 - rt.value, 0.0), 1.0)
    b3 = chi * ((1.0 - p_low) * model.c2_minus + p_low * model.c2_plus) / s2c2
    b4 = None if t4_const is None else t4_const / chi
    err = (model.sigma**2 * r1.err_est + r2.err_est) / s2c2 + r1.err_est \
        + chi * rt.err_est * abs(model.c2_plus - model.c2_minus) / s2c2
    flags = list(dict.fromkeys(r1.flags + r2.flags + rt.flags))
    slack = SLACK_FACTOR * max(err, 1e-15)
    if diff > b3 + slack:
        flags.append("t3-violation")
    if b4 is not None and diff > b4 + slack:
        flags.append("t4-violation")
    return StrategyPoint(chi=chi, i1=r1.value, i2=r2.value, lrm=lrm_v,
                         delta=delta_v, diff=diff, bound_t3=b3, bound_t4=b4,
                         err_est=err, flags=tuple(flags))


def strategy_point(model: MmmModel, phi: CharFn, chi: float,
                   cfg: FourierConfig,
                   t4_const: Optional[float] = None,
                   compute_t4: bool = True) -> StrategyPoint:
    r1 = transform("i1", phi, chi, cfg)
    r2 = transform("i2", phi, chi, cfg, model=model)
    rt = transform("tail", phi, chi, cfg)
    if t4_const is None and compute_t4:
        t4_const = bound_t4_constant(model, phi, cfg)
    return _assemble_point(model, chi, r1, r2, rt, t4_const)


def strategy_point_for_strike(model: MmmModel, phi: CharFn, spot: float,
                              strike: float, cfg: FourierConfig) -> StrategyPoint:
    """Same record keyed by (spot, strike); depends on them only through
    chi = strike / spot, so scaling both by any factor changes nothing."""
    if spot <= 0 or strike <= 0:
        raise ValueError("spot and strike must be positive")
    return strategy_point(model, phi, strike / spot, cfg)


def sweep(model: MmmModel, phi: CharFn, chis: Sequence[float],
          cfg: FourierConfig, workers: Optional[int] = None) -> List[StrategyPoint]:
    """One StrategyPoint per moneyness, ascending; FFT mode reuses a single
    transform pass per kind.  Per-point failures are recorded as flags, not
    raised, so one bad point cannot sink a batch run.  The engine is pure,
    so quadrature-mode points may be evaluated on ``workers`` threads;
    result order always matches input order.
    """
    chis = [float(c) for c in chis]
    if any(c <= 0 for c in chis):
        raise ValueError("all moneyness values must be positive")
    if any(b <= a for a, b in zip(chis, chis[1:])):
        raise ValueError("moneyness grid must be strictly ascending")

    t4_const: Optional[float]
    try:
        t4_const = bound_t4_constant(model, phi, cfg)
    except LevyIntegrabilityError:
        t4_const = None

    if cfg.mode == MODE_FFT:
        rs1 = batch("i1", phi, chis, cfg, model=model)
        rs2 = batch("i2", phi, chis, cfg, model=model)
        rst = batch("tail", phi, chis, cfg, model=model)
        return [_assemble_point(model, chi, r1, r2, rt, t4_const)
                for chi, r1, r2, rt in zip(chis, rs1, rs2, rst)]

    def one(chi: float) -> StrategyPoint:
        try:
            return strategy_point(model, phi, chi, cfg, t4_const=t4_const)
        except Exception as exc:  # collected, not fail-fast
            return StrategyPoint(
                chi=chi, i1=math.nan, i2=math.nan, lrm=math.nan,
                delta=math.nan, diff=math.nan, bound_t3=math.nan,
                bound_t4=None, err_est=math.inf,
                flags=("error:" + type(exc).__name__, "point-violation"))

    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, chis))
    return [one(chi) for chi in chis]

"""Temperature solver: root of the MLE residual in inverse-temperature space.

The residual R(beta) is monotone in beta, so a bracketed scalar root
finder is sufficient. The solve happens in beta = 1/T on a fixed bracket
(default [1e-2, 1e4]); temperatures are exposed to callers. When the
residual does not change sign on the bracket there is no interior MLE:
the estimate is clamped to the bracket edge and flagged as saturated
rather than silently reported, and an all-degenerate sequence (every
step's logits equal) is flagged too, since then any temperature is an
MLE.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .estimation import LogitSequence, TokenSequence, prepare


class SolverStatus(str, enum.Enum):
    CONVERGED = "converged"
    SATURATED_LOW_T = "saturated_low_T"
    SATURATED_HIGH_T = "saturated_high_T"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class SolverConfig:
    """Bracket and tolerances for the beta-space root solve."""

    beta_lo: float = 1e-2
    beta_hi: float = 1e4
    beta_init: float = 5e3
    tol_beta_rel: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (0.0 < self.beta_lo < self.beta_init < self.beta_hi):
            raise ValueError(
                "need 0 < beta_lo < beta_init < beta_hi, got "
                f"({self.beta_lo}, {self.beta_init}, {self.beta_hi})"
            )
        if not (math.isfinite(self.beta_hi) and math.isfinite(self.tol_beta_rel)):
            raise ValueError("solver config values must be finite")
        if self.tol_beta_rel <= 0.0:
            raise ValueError(f"tol_beta_rel must be positive, got {self.tol_beta_rel}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class TemperatureEstimate:
    """Estimated temperature plus solver diagnostics.

    t_hat is exactly 1/beta_hat. For saturated statuses beta_hat sits on
    the corresponding bracket edge; for degenerate sequences t_hat is
    reported as the canonical 1.0.
    """

    t_hat: float
    beta_hat: float
    status: SolverStatus
    iterations: int
    residual_at_root: float
    log_likelihood_at_root: float


@dataclass(frozen=True)
class RootResult:
    root: float
    iterations: int
    converged: bool
    f_at_root: float


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol_rel: float = 1e-10,
    max_iter: int = 200,
    x0: float | None = None,
    accelerate: bool = True,
) -> RootResult:
    """Bracketed scalar root finder: bisection with Illinois acceleration.

    f(lo) and f(hi) must be finite and of opposite signs. Interpolated
    (regula falsi) steps are taken while they keep halving the bracket;
    otherwise the step falls back to bisection, so worst-case behaviour
    is plain bisection. With accelerate=False every step bisects.

    Returns the bracket midpoint once the bracket width is at most
    tol_rel times the current bracket magnitude; if max_iter runs out
    first the best midpoint is returned with converged=False. An x0
    strictly inside the bracket is used as the first probe point.
    """
    lo, hi = float(lo), float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")
    flo, fhi = float(f(lo)), float(f(hi))
    if not (math.isfinite(flo) and math.isfinite(fhi)):
        raise ValueError("f must be finite at both bracket ends")
    if flo == 0.0:
        return RootResult(lo, 0, True, 0.0)
    if fhi == 0.0:
        return RootResult(hi, 0, True, 0.0)
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(f"no sign change on bracket: f({lo})={flo}, f({hi})={fhi}")

    a, b, fa, fb = lo, hi, flo, fhi
    side = 0  # which end the last interpolated point replaced
    stall = 0  # interpolation steps since the bracket last halved
    iterations = 0
    converged = False

    while iterations < max_iter:
        width = b - a
        if width <= tol_rel * max(abs(a), abs(b)):
            converged = True
            break
        iterations += 1

        x = math.nan
        if iterations == 1 and x0 is not None and a < x0 < b:
            x = float(x0)  # caller-provided first probe; the root is independent of it
        elif accelerate and stall < 2:
            denom = fb - fa
            if denom != 0.0:
                x = (a * fb - b * fa) / denom
        if not (a < x < b):
            x = 0.5 * (a + b)
        fx = f(x)
        if fx == 0.0:
            return RootResult(x, iterations, True, 0.0)

        if (fx > 0.0) == (fa > 0.0):
            a, fa = x, fx
            if side == -1:
                fb *= 0.5  # Illinois: damp the stale end so interpolation moves
            side = -1
        else:
            b, fb = x, fx
            if side == +1:
                fa *= 0.5
            side = +1
        stall = 0 if (b - a) <= 0.5 * width else stall + 1

    mid = 0.5 * (a + b)
    if not converged and (b - a) <= tol_rel * max(abs(a), abs(b)):
        converged = True
    return RootResult(mid, iterations, converged, float(f(mid)))


def estimate_temperature(
    logits: LogitSequence,
    tokens: TokenSequence,
    config: SolverConfig | None = None,
) -> TemperatureEstimate:
    """Maximum-likelihood temperature of a token sequence given its logits.

    Evaluates the residual at the bracket ends first: two evaluations
    decide saturation before any iteration. A residual that is >= 0 at
    beta_lo means the root lies at or below beta_lo (temperature above
    1/beta_lo): saturated_high_T. A residual <= 0 at beta_hi means the
    root lies at or beyond beta_hi: saturated_low_T, the regime where
    near-greedy sequences make the temperature unidentifiable.
    """
    cfg = config or SolverConfig()
    prep = prepare(logits, tokens)

    if bool((np.ptp(logits.steps, axis=1) == 0.0).all()):
        beta_hat = 1.0
        return TemperatureEstimate(
            t_hat=1.0,
            beta_hat=beta_hat,
            status=SolverStatus.DEGENERATE,
            iterations=0,
            residual_at_root=prep.residual(beta_hat),
            log_likelihood_at_root=prep.log_likelihood(beta_hat),
        )

    f_lo = prep.residual(cfg.beta_lo)
    f_hi = prep.residual(cfg.beta_hi)
    if f_lo >= 0.0:
        return TemperatureEstimate(
            t_hat=1.0 / cfg.beta_lo,
            beta_hat=cfg.beta_lo,
            status=SolverStatus.SATURATED_HIGH_T,
            iterations=0,
            residual_at_root=f_lo,
            log_likelihood_at_root=prep.log_likelihood(cfg.beta_lo),
        )
    if f_hi <= 0.0:
        return TemperatureEstimate(
            t_hat=1.0 / cfg.beta_hi,
            beta_hat=cfg.beta_hi,
            status=SolverStatus.SATURATED_LOW_T,
            iterations=0,
            residual_at_root=f_hi,
            log_likelihood_at_root=prep.log_likelihood(cfg.beta_hi),
        )

    result = find_root(
        prep.residual,
        cfg.beta_lo,
        cfg.beta_hi,
        tol_rel=cfg.tol_beta_rel,
        max_iter=cfg.max_iter,
        x0=cfg.beta_init,
    )
    if not result.converged:
        raise RuntimeError(
            f"root finder exhausted {cfg.max_iter} iterations without reaching "
            f"relative tolerance {cfg.tol_beta_rel}"
        )
    beta_hat = result.root
    return TemperatureEstimate(
        t_hat=1.0 / beta_hat,
        beta_hat=beta_hat,
        status=SolverStatus.CONVERGED,
        iterations=result.iterations,
        residual_at_root=result.f_at_root,
        log_likelihood_at_root=prep.log_likelihood(beta_hat),
    )

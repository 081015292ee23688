"""Exponential Levy model core: jump measures, derived constants, and the
minimal-martingale-measure (MMM) transform.

The log price is L_t = mu*t + sigma*W_t + compensated jumps with Levy measure
nu, so S_t = s0 * exp(L_t).  Everything downstream (Fourier transforms,
hedging strategies, bounds) is driven by the MMM dynamics derived here:
a Girsanov tilt -xi on the Brownian part and a jump-intensity tilt
(1 - theta_x) nu(dx), with theta_x proportional to (e^x - 1).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

__all__ = [
    "LevyIntegrabilityError",
    "AssumptionError",
    "StripError",
    "AccuracyError",
    "DivergenceError",
    "LevyMeasure",
    "ZeroMeasure",
    "DensityMeasure",
    "LevyModel",
    "MmmModel",
    "compute_mu_s",
    "c2_split",
    "to_mmm",
    "mmm_cumulant",
    "mmm_cumulant_quad",
]

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10


class LevyIntegrabilityError(ValueError):
    """A required moment integral of the Levy measure diverges."""


class AssumptionError(ValueError):
    """Model violates the structural drift constraint 0 >= mu_s > -(sigma^2 + C2)."""


class StripError(ValueError):
    """Evaluation requested outside the analyticity strip."""


class AccuracyError(RuntimeError):
    """A numerical result failed to meet its accuracy contract."""


class DivergenceError(AccuracyError):
    """A truncated integral shows no decay: treated as divergent."""


# ---------------------------------------------------------------------------
# Levy measures
# ---------------------------------------------------------------------------

class LevyMeasure(ABC):
    """Jump measure nu on R \\ {0}.

    The operations below are the only integrals the rest of the library
    needs.  Concrete measures should override ``exp_moment`` / ``x_exp_moment``
    with closed forms when they have them; the quadrature fallbacks here are
    the reference implementation and the test oracle.
    """

    #: admissible open interval for Re(w) in exp_moment(w); +-inf if entire
    w_lo: float = -math.inf
    w_hi: float = math.inf

    @abstractmethod
    def density(self, x):
        """Levy density d(nu)/dx, vectorized over x."""

    @abstractmethod
    def quad_panels(self, w_re: float = 0.0) -> Sequence[Tuple[float, float]]:
        """Integration panels covering the effective support, split at 0.

        ``w_re`` is the largest Re(w) of any exponential factor e^{wx}
        multiplying the density, so panels can extend far enough into the
        right tail.
        """

    @property
    def is_zero(self) -> bool:
        return False

    def total_mass(self) -> float:
        val = 0.0
        for a, b in self.quad_panels():
            val += quad(self.density, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL)[0]
        return val

    def _check_w(self, w) -> None:
        re = np.real(w)
        if not np.all((self.w_lo < re) & (re < self.w_hi)):
            raise StripError(
                f"exp_moment requires Re(w) in ({self.w_lo}, {self.w_hi}); got {re}"
            )

    def exp_moment(self, w, region: str = "all", check: bool = True):
        """Integral of (e^{wx} - 1) nu(dx) over the region ('all'|'pos'|'neg').

        The -1 makes the integrand O(x) at the origin, which keeps
        infinite-activity measures (density ~ 1/|x|) integrable.  Accepts
        scalar or array ``w``.  ``check=False`` skips the strip guard; only
        meaningful for closed-form measures whose formulas continue
        analytically.
        """
        w = np.asarray(w, dtype=complex)
        if check:
            self._check_w(w)
        elif not getattr(self, "closed_form", False):
            raise StripError("quadrature-backed measure cannot be continued "
                             "outside its strip")
        if w.ndim == 0:
            return self._quad_exp_moment(complex(w), region)
        return np.array([self._quad_exp_moment(complex(wi), region)
                         for wi in w.ravel()]).reshape(w.shape)

    def _quad_exp_moment(self, w: complex, region: str) -> complex:
        def f(x):
            return (np.exp(w * x) - 1.0) * self.density(x)

        val = 0.0 + 0.0j
        for a, b in self.quad_panels(w_re=max(w.real, 0.0)):
            if region == "pos" and b <= 0:
                continue
            if region == "neg" and a >= 0:
                continue
            r = quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                     complex_func=True, limit=200)
            val += r[0]
        if not np.isfinite(val):
            raise LevyIntegrabilityError(
                f"exp_moment diverged at w={w} over region '{region}'")
        return val

    def x_exp_moment(self, w: float = 1.0) -> float:
        """Integral of x e^{wx} nu(dx); finite under the |x| moment condition."""
        self._check_w(complex(w))

        def f(x):
            return x * np.exp(w * x) * self.density(x)

        val = 0.0
        for a, b in self.quad_panels(w_re=max(w, 0.0)):
            val += quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)[0]
        return val

    def mean_jump(self) -> float:
        """Integral of x nu(dx)."""
        return self.x_exp_moment(0.0)

    def exp_power_moment(self, n: int, region: str = "all") -> float:
        """Integral of (e^x - 1)^n nu(dx) via the binomial expansion."""
        val = 0.0 + 0.0j
        for j in range(1, n + 1):
            val += math.comb(n, j) * (-1.0) ** (n - j) * self.exp_moment(float(j), region)
        return float(val.real)

    def validate(self) -> None:
        """Check the integrability conditions: (|x| v x^2) and (e^x-1)^n for n=2,4."""
        try:
            for n in (2, 4):
                v = self.exp_power_moment(n)
                if not np.isfinite(v):
                    raise LevyIntegrabilityError(
                        f"exponential jump moment (e^x-1)^{n} diverges")
        except StripError as exc:
            raise LevyIntegrabilityError(
                f"exponential jump moment outside admissible strip: {exc}") from exc
        m_abs = 0.0
        for a, b in self.quad_panels():
            m_abs += quad(lambda x: np.maximum(np.abs(x), x * x) * self.density(x),
                          a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)[0]
        if not np.isfinite(m_abs):
            raise LevyIntegrabilityError("moment integral (|x| v x^2) diverges")


class ZeroMeasure(LevyMeasure):
    """No jumps (Black-Scholes component only)."""

    closed_form = True

    @property
    def is_zero(self) -> bool:
        return True

    def density(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def quad_panels(self, w_re: float = 0.0):
        return []

    def total_mass(self) -> float:
        return 0.0

    def exp_moment(self, w, region: str = "all", check: bool = True):
        w = np.asarray(w, dtype=complex)
        return np.zeros(w.shape, dtype=complex) if w.ndim else 0.0 + 0.0j

    def x_exp_moment(self, w: float = 1.0) -> float:
        return 0.0

    def validate(self) -> None:
        return None


class DensityMeasure(LevyMeasure):
    """Levy measure given by a plain density callable; all moments by quadrature.

    ``support`` is a radius beyond which exp(w_max*x)*density is negligible,
    and ``singular_origin`` marks densities that blow up like 1/|x| at 0 so
    panels get split there.
    """

    def __init__(self, density: Callable, support: float = 10.0,
                 singular_origin: bool = False,
                 w_lo: float = -math.inf, w_hi: float = math.inf):
        self._density = density
        self.support = float(support)
        self.singular_origin = bool(singular_origin)
        self.w_lo = float(w_lo)
        self.w_hi = float(w_hi)

    def density(self, x):
        return self._density(x)

    def quad_panels(self, w_re: float = 0.0):
        a = self.support
        return [(-a, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, a)]


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevyModel:
    """Exponential Levy model under the physical measure.

    mu     -- drift of the log-price exponent (per unit time)
    sigma  -- Brownian volatility, >= 0
    measure-- Levy measure of the jumps
    s0     -- initial asset price, > 0
    """

    mu: float
    sigma: float
    measure: LevyMeasure
    s0: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.s0 <= 0:
            raise ValueError(f"s0 must be > 0, got {self.s0}")

    def validate(self) -> None:
        self.measure.validate()


@dataclass(frozen=True)
class MmmModel:
    """Model transformed to the minimal martingale measure.

    Carries the cached constants used everywhere downstream:
    mu_s (risky-asset drift rate), xi (Brownian Girsanov tilt),
    beta = mu_s / (sigma^2 + C2) (so theta_x = beta * (e^x - 1)),
    the exponential jump moments C2 = C2+ + C2-, the MMM log-price drift
    drift_star, and m1_star = integral of x nu*(dx).
    """

    base: LevyModel
    mu_s: float
    xi: float
    beta: float
    c2: float
    c2_plus: float
    c2_minus: float
    drift_star: float
    m1_star: float

    @property
    def sigma(self) -> float:
        return self.base.sigma

    @property
    def measure(self) -> LevyMeasure:
        return self.base.measure

    def theta(self, x):
        """Jump tilt theta_x = beta * (e^x - 1); < 1 on the support of nu."""
        return self.beta * (np.exp(x) - 1.0)

    def nu_star_density(self, x):
        """Density of the tilted measure nu*(dx) = (1 - theta_x) nu(dx)."""
        return (1.0 - self.theta(x)) * self.measure.density(x)

    def exp_moment_star(self, w, check: bool = True):
        """Integral of (e^{wx} - 1) nu*(dx), assembled from base-measure moments."""
        g = self.measure.exp_moment
        return (g(w, check=check)
                - self.beta * (g(w + 1.0, check=check) - g(w, check=check)
                               - g(1.0)))

    def strip(self) -> Tuple[float, float]:
        """Open interval of valid Im(z) for the MMM cumulant."""
        lo, hi = self.measure.w_lo, self.measure.w_hi
        # exp_moment is evaluated at iz and iz+1, and Re(iz) = -Im(z)
        return (1.0 - hi if math.isfinite(hi) else -math.inf,
                -lo if math.isfinite(lo) else math.inf)


def compute_mu_s(model: LevyModel) -> float:
    """Drift rate mu_s = mu + sigma^2/2 + integral of (e^x - 1 - x) nu(dx)."""
    nu = model.measure
    try:
        jump_part = float(complex(nu.exp_moment(1.0)).real) - nu.mean_jump()
    except StripError as exc:
        raise LevyIntegrabilityError(
            f"the first exponential jump moment (e^x - 1) diverges: {exc}") from exc
    return model.mu + 0.5 * model.sigma**2 + jump_part


def c2_split(model: LevyModel) -> Tuple[float, float]:
    """(C2+, C2-): integrals of (e^x - 1)^2 nu(dx) over x>0 and x<0."""
    nu = model.measure
    try:
        c2p = nu.exp_power_moment(2, "pos")
        c2m = nu.exp_power_moment(2, "neg")
    except StripError as exc:
        raise LevyIntegrabilityError(
            f"the squared exponential jump moment (e^x - 1)^2 diverges: {exc}") from exc
    if c2p < -1e-12 or c2m < -1e-12:
        raise LevyIntegrabilityError(f"negative squared moment: {c2p}, {c2m}")
    return max(c2p, 0.0), max(c2m, 0.0)


def to_mmm(model: LevyModel) -> MmmModel:
    """Build the minimal-martingale-measure dynamics for ``model``.

    Validates the integrability conditions and the drift constraint
    0 >= mu_s > -(sigma^2 + C2) eagerly (this is what keeps theta_x < 1),
    then assembles the Girsanov-tilted Levy triplet:

        xi      = mu_s * sigma / (sigma^2 + C2)
        nu*(dx) = (1 - theta_x) nu(dx)
        b*      = mu - sigma*xi - integral of x theta_x nu(dx)

    The martingale identity Psi*(-i) = 0 holds by construction and is the
    acceptance check for this transform.
    """
    model.validate()
    nu = model.measure
    mu_s = compute_mu_s(model)
    c2p, c2m = c2_split(model)
    c2 = c2p + c2m
    denom = model.sigma**2 + c2
    if denom == 0.0:
        # deterministic model: only mu = 0 is arbitrage-free
        if abs(mu_s) > 1e-14:
            raise AssumptionError(
                f"degenerate model (sigma=0, nu=0) requires mu_s=0, got {mu_s}")
        return MmmModel(base=model, mu_s=0.0, xi=0.0, beta=0.0, c2=0.0,
                        c2_plus=0.0, c2_minus=0.0, drift_star=model.mu,
                        m1_star=0.0)
    if 0.0 < mu_s <= 1e-12 * max(1.0, denom):
        mu_s = 0.0  # roundoff from cancelling drift terms
    if not (0.0 >= mu_s > -denom):
        raise AssumptionError(
            "drift constraint violated: need 0 >= mu_s > -(sigma^2 + C2), "
            f"got mu_s={mu_s:.6g} with -(sigma^2 + C2)={-denom:.6g}")
    beta = mu_s / denom
    xi = beta * model.sigma
    m1 = nu.mean_jump()
    xexp1 = nu.x_exp_moment(1.0)
    drift_star = model.mu - model.sigma * xi - beta * (xexp1 - m1)
    m1_star = m1 - beta * (xexp1 - m1)
    return MmmModel(base=model, mu_s=mu_s, xi=xi, beta=beta, c2=c2,
                    c2_plus=c2p, c2_minus=c2m, drift_star=drift_star,
                    m1_star=m1_star)


def mmm_cumulant(model: MmmModel, z, check_strip: bool = True):
    """MMM cumulant exponent Psi*(z), so phi_tau(z) = exp(tau * Psi*(z)).

    Psi*(z) = i z b* - sigma^2 z^2 / 2 + integral of
    (e^{izx} - 1 - izx) nu*(dx).  The jump integral is assembled from the
    base measure's exponential moments, which are closed-form for the
    shipped models and adaptive quadrature otherwise.  Accepts scalar or
    array ``z``; ``check_strip=False`` evaluates the analytic continuation
    of a closed-form measure (used internally for contour tails).
    """
    z = np.asarray(z, dtype=complex)
    if check_strip and not model.measure.is_zero:
        lo, hi = model.strip()
        im = np.imag(z)
        if not np.all((lo < im) & (im < hi)):
            raise StripError(
                f"Im(z)={im} outside the cumulant strip ({lo}, {hi})")
    iz = 1j * z
    jump = model.exp_moment_star(iz, check=check_strip) - iz * model.m1_star
    out = iz * model.drift_star - 0.5 * model.sigma**2 * z * z + jump
    return complex(out) if out.ndim == 0 else out


def mmm_cumulant_quad(model: MmmModel, z: complex) -> complex:
    """Quadrature oracle for Psi*(z): integrates the tilted Levy density
    directly, independent of any closed-form exponential moments."""
    z = complex(z)
    iz = 1j * z

    def f(x):
        return (np.exp(iz * x) - 1.0 - iz * x) * model.nu_star_density(x)

    jump = 0.0 + 0.0j
    for a, b in model.measure.quad_panels(w_re=max(-z.imag, 0.0) + 1.0):
        jump += quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                     complex_func=True, limit=200)[0]
    return iz * model.drift_star - 0.5 * model.sigma**2 * z * z + jump

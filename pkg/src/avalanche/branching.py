"""Poisson Galton-Watson limit of the avalanche chain.

Covers simulation, the extinction-probability fixed point
a = exp(-(1-a)*mu), the Borel-Tanner law of the total progeny, exact
generation-wise extinction via generating-function iteration, and the
classical Agresti / Lindvall bounds used to sandwich duration and
maxima.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln

FIXED_POINT_TOL = 1e-12


@dataclass(frozen=True)
class BranchingParams:
    """Offspring mean and initial population of the limiting process."""

    lam: float
    i0: int = 1

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"offspring mean must be positive, got {self.lam}")
        if self.i0 < 1:
            raise ValueError(f"initial population must be >= 1, got {self.i0}")

    @property
    def regime(self) -> str:
        if self.lam < 1:
            return "subcritical"
        if self.lam > 1:
            return "supercritical"
        return "critical"


@dataclass(frozen=True)
class BranchingPath:
    """Generation sizes of one simulated Galton-Watson run."""

    states: np.ndarray
    escaped: bool = False  # population blew past the explosion cap

    @property
    def extinct(self) -> bool:
        return not self.escaped and self.states[-1] == 0

    @property
    def duration(self) -> int:
        return len(self.states) - 1

    @property
    def size(self) -> int:
        return int(self.states.sum())

    @property
    def max(self) -> int:
        return int(self.states.max())


def _solve_u(mu: float) -> float:
    """Solve u*exp(-u) = mu*exp(-mu) for the root u != mu.

    f(u) = log(u) - u is strictly increasing on (0,1) and strictly
    decreasing on (1,oo), so for mu > 1 the dual root lies in (0,1) and
    for mu < 1 in (1,oo).  Bisection brackets it, Newton polishes.
    """
    target = math.log(mu) - mu
    if mu > 1.0:
        lo, hi = 1e-300, 1.0
    else:
        hi = 2.0
        while math.log(hi) - hi > target:
            hi *= 2.0
        lo = 1.0
    sign = 1.0 if mu > 1.0 else -1.0  # f increasing (mu>1) or decreasing
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if sign * (math.log(mid) - mid - target) < 0.0:
            lo = mid
        else:
            hi = mid
    u = 0.5 * (lo + hi)
    for _ in range(4):  # Newton polish; derivative 1/u - 1 vanishes at u=1
        deriv = 1.0 / u - 1.0
        if abs(deriv) < 1e-8:
            break
        step = (math.log(u) - u - target) / deriv
        if u - step <= 0.0:
            break
        u -= step
    return u


def extinction_prob(mu: float) -> float:
    """Root alpha != 1 of alpha = exp(-(1-alpha)*mu).

    Lies in (0,1) for mu > 1 (the extinction probability) and in
    (1,oo) for mu < 1 (its dual).  mu = 1 has no non-unit root.
    """
    if mu <= 0:
        raise ValueError(f"mean must be positive, got {mu}")
    if mu == 1.0:
        raise ValueError("mu = 1: the fixed point equation only has root 1")
    alpha = _solve_u(mu) / mu
    if abs(alpha - math.exp(-(1.0 - alpha) * mu)) >= FIXED_POINT_TOL:
        raise ArithmeticError(f"fixed point solve failed to converge at mu={mu}")
    return alpha


def borel_tanner_pmf(lam: float, i0: int, j) -> np.ndarray | float:
    """Borel-Tanner pmf of the total progeny at j (scalar or array).

    P(S = j) = (i0/j) * (lam*j)**(j-i0) / (j-i0)! * exp(-lam*j) for
    j >= i0, zero below.  For lam > 1 this is a subdistribution with
    total mass alpha_lam**i0.
    """
    if lam <= 0:
        raise ValueError(f"offspring mean must be positive, got {lam}")
    if i0 < 1:
        raise ValueError(f"initial population must be >= 1, got {i0}")
    jj = np.asarray(j, dtype=float)
    scalar = jj.ndim == 0
    jj = np.atleast_1d(jj)
    out = np.zeros_like(jj)
    ok = jj >= i0
    jo = jj[ok]
    logp = (math.log(i0) - np.log(jo) + (jo - i0) * np.log(lam * jo)
            - gammaln(jo - i0 + 1) - lam * jo)
    # (lam*j)**0 with j == i0 is 1 even when the log form hits log(0)*0
    logp = np.where(jo == i0, math.log(i0) - np.log(jo) - lam * jo, logp)
    out[ok] = np.exp(logp)
    return float(out[0]) if scalar else out


def borel_tanner_total_mass(lam: float, i0: int,
                            rel_tol: float = 1e-15,
                            max_j: int = 10 ** 6) -> float:
    """Sum the Borel-Tanner pmf adaptively until the tail is negligible.

    The critical tail decays like j**-1.5, hence the hard cap.
    """
    if lam < 1:
        min_j = int(10.0 / (1.0 - lam) ** 2)
    else:
        min_j = max_j
    total = 0.0
    block = 4096
    j0 = i0
    while j0 <= max_j:
        j = np.arange(j0, min(j0 + block, max_j + 1))
        terms = borel_tanner_pmf(lam, i0, j)
        total += float(terms.sum())
        if j0 > min_j and terms[-1] < rel_tol * total:
            break
        j0 += block
    return total


EXPLOSION_CAP = 10 ** 9


def gw_simulate(params: BranchingParams, rng: np.random.Generator,
                max_steps: int = 10 ** 6,
                explosion_cap: int = EXPLOSION_CAP) -> BranchingPath:
    """Simulate generation sizes Z_0 = i0, Z_{k+1} ~ Poisson(lam * Z_k).

    A population above ``explosion_cap`` stops the run and flags it as
    escaped (counted as survival in extinction statistics).
    """
    z = params.i0
    states = [z]
    for _ in range(max_steps):
        z = int(rng.poisson(params.lam * z))
        states.append(z)
        if z == 0:
            return BranchingPath(np.array(states))
        if z > explosion_cap:
            return BranchingPath(np.array(states), escaped=True)
    return BranchingPath(np.array(states), escaped=True)


def gw_extinct_by(lam: float, i0: int, m: int) -> float:
    """Exact P(extinct within m generations) = F^m(0)**i0.

    F(s) = exp(lam*(s-1)) is the Poisson offspring generating function.
    """
    if m < 0:
        raise ValueError(f"horizon must be >= 0, got {m}")
    s = 0.0
    for _ in range(m):
        s = math.exp(lam * (s - 1.0))
    return s ** i0


def duration_tail_s(c: float) -> float:
    """s(c) = (2 - c)/c from the Agresti lower bound."""
    return (2.0 - c) / c


def duration_tail_r(c: float) -> float:
    """r(c) = c*exp(-c) / (exp(-c) - (1 - c)) from the Agresti upper bound."""
    if c == 1.0:
        return 1.0
    return c * math.exp(-c) / (math.exp(-c) - (1.0 - c))


def agresti_duration_bounds(c: float, i0: int, m: int) -> tuple[float, float]:
    """(lower, upper) sandwich for P(extinction time <= m), Poisson offspring.

    Critical case: (m/(m+2))**i0 <= P <= (m/(m+e-1))**i0.  Off-critical
    cases use the s/r weights; the supercritical branch weighs them at
    alpha_c * c.
    """
    if c <= 0:
        raise ValueError(f"offspring mean must be positive, got {c}")
    if m < 1:
        raise ValueError(f"horizon must be >= 1, got {m}")
    if c == 1.0:
        return (m / (m + 2.0)) ** i0, (m / (m + math.e - 1.0)) ** i0
    if c > 1.0:
        alpha = extinction_prob(c)
        b = (c * alpha) ** m
        s1 = duration_tail_s(alpha * c)
        r1 = duration_tail_r(alpha * c)
        lower = (alpha * s1 * (1.0 - b) / (s1 - b)) ** i0
        upper = (alpha * r1 * (1.0 - b) / (r1 - b)) ** i0
        return lower, upper
    b = c ** m
    s2 = duration_tail_s(c)
    r2 = duration_tail_r(c)
    lower = (s2 * (1.0 - b) / (s2 - b)) ** i0
    upper = (r2 * (1.0 - b) / (r2 - b)) ** i0
    return lower, upper


def lindvall_max_bound(lam: float, i0: int, m: int) -> float:
    """Upper bound on P(max generation >= m) for lam <= 1.

    Critical: i0/m.  Subcritical: (alpha**i0 - 1)/(alpha**m - 1) with
    alpha = alpha_lam > 1.  No such bound is available for lam > 1.
    """
    if lam > 1.0:
        raise ValueError("the maxima bound only applies for lam <= 1")
    if not m > i0 >= 1:
        raise ValueError(f"need m > i0 >= 1, got m={m}, i0={i0}")
    if lam == 1.0:
        return i0 / m
    alpha = extinction_prob(lam)
    return (alpha ** i0 - 1.0) / (alpha ** m - 1.0)

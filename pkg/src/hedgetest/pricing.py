"""Risk-neutral pricing of assets and European derivatives on test wealth.

Because the risk-neutral measure coincides with the null measure for these
processes (and the risk-free rate is 0 throughout), prices are plain null
expectations of payoffs.  Three routes are provided: exact backward
induction on a recombining binomial lattice, Monte Carlo with reproducible
per-replication streams, and the zero-rate Black-Scholes closed form for
log-normal wealth.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import bisect
from scipy.stats import norm

from .rng import stream


class StrikeSolveError(RuntimeError):
    """No strike in the search domain satisfies the hedge-floor equation."""


class ContractKind(enum.Enum):
    EUROPEAN_CALL = "call"
    EUROPEAN_PUT = "put"
    CUSTOM_EUROPEAN = "custom"


class PricingMethod(enum.Enum):
    LATTICE = "lattice"
    MONTE_CARLO = "monte_carlo"
    BLACK_SCHOLES = "black_scholes"


def risk_neutral_up_prob(u: float, d: float, r: float = 0.0) -> float:
    """Probability q solving q*u + (1-q)*d = 1 + r.

    Parameters
    ----------
    u, d : float
        Multiplicative up and down factors of the underlying, d < 1 + r < u.
    r : float
        One-period risk-free rate (0 everywhere in this package; kept so the
        no-arbitrage precondition is still checked).
    """
    if d <= 0.0:
        raise ValueError(f"down factor must be positive, got {d}")
    if not d < 1.0 + r < u:
        raise ValueError(
            f"arbitrage-violating factors: need d < 1 + r < u, got d={d}, r={r}, u={u}")
    return (1.0 + r - d) / (u - d)


@dataclass(frozen=True)
class LatticeModel:
    """Recombining binomial lattice for a wealth process."""

    up_factor: float
    down_factor: float
    steps: int
    risk_free_rate: float = 0.0

    def __post_init__(self):
        risk_neutral_up_prob(self.up_factor, self.down_factor, self.risk_free_rate)
        if self.steps < 1:
            raise ValueError(f"lattice needs at least one step, got {self.steps}")

    @property
    def risk_neutral_prob(self) -> float:
        return risk_neutral_up_prob(self.up_factor, self.down_factor, self.risk_free_rate)

    def terminal_values(self, expiry: int, spot: float = 1.0) -> np.ndarray:
        """Underlying values at the expiry level, indexed by up-move count."""
        j = np.arange(expiry + 1)
        return spot * self.up_factor ** j * self.down_factor ** (expiry - j)

    @classmethod
    def for_bernoulli_bet(cls, lam: float, null_p: float, steps: int) -> "LatticeModel":
        """Lattice of a constant-fraction bet on Bernoulli(null_p) outcomes.

        One step multiplies wealth by 1 + lam*(1 - p) or 1 - lam*p; the
        risk-neutral up probability then equals the null p itself.
        """
        return cls(1.0 + lam * (1.0 - null_p), 1.0 - lam * null_p, steps)


@dataclass(frozen=True)
class Contract:
    """European contract on terminal wealth: payoff depends on K_tau only."""

    kind: ContractKind
    strike: float
    expiry: int
    payoff_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.strike < 0.0:
            raise ValueError(f"strike must be nonnegative, got {self.strike}")
        if self.expiry < 1:
            raise ValueError(f"expiry must be positive, got {self.expiry}")
        if self.kind is ContractKind.CUSTOM_EUROPEAN and self.payoff_fn is None:
            raise ValueError("custom contract needs a payoff function")

    def payoff(self, terminal):
        """Payoff at expiry; accepts a scalar or an array of terminal values."""
        k = np.asarray(terminal, dtype=float)
        if self.kind is ContractKind.EUROPEAN_CALL:
            out = np.maximum(k - self.strike, 0.0)
        elif self.kind is ContractKind.EUROPEAN_PUT:
            out = np.maximum(self.strike - k, 0.0)
        else:
            out = np.asarray(self.payoff_fn(k), dtype=float)
        return float(out) if np.isscalar(terminal) else out

    @classmethod
    def call(cls, strike: float, expiry: int) -> "Contract":
        return cls(ContractKind.EUROPEAN_CALL, strike, expiry)

    @classmethod
    def put(cls, strike: float, expiry: int) -> "Contract":
        return cls(ContractKind.EUROPEAN_PUT, strike, expiry)


@dataclass(frozen=True)
class PriceEstimate:
    value: float
    std_error: float
    method: PricingMethod

    def __post_init__(self):
        if self.value < 0.0 and self.value > -1e-15:
            object.__setattr__(self, "value", 0.0)
        if self.value < 0.0:
            raise ValueError(f"price must be nonnegative, got {self.value}")
        if self.std_error < 0.0:
            raise ValueError(f"standard error must be nonnegative, got {self.std_error}")


def lattice_node_values(model: LatticeModel, contract: Contract,
                        spot: float = 1.0) -> list[np.ndarray]:
    """Backward-induced contract values on every lattice node.

    Returns one array per time level t = 0..expiry; entry j of level t is
    the value at the node reached by j up-moves.  Level expiry holds the
    payoff itself.  With r = 0 there is no discounting: each parent value is
    q*up_child + (1-q)*down_child.
    """
    if contract.expiry > model.steps:
        raise ValueError(
            f"contract expiry {contract.expiry} exceeds lattice depth {model.steps}")
    q = model.risk_neutral_prob
    values = contract.payoff(model.terminal_values(contract.expiry, spot))
    levels = [np.asarray(values, dtype=float)]
    for _ in range(contract.expiry):
        values = q * values[1:] + (1.0 - q) * values[:-1]
        levels.append(values)
    levels.reverse()
    return levels


def lattice_price(model: LatticeModel, contract: Contract,
                  spot: float = 1.0) -> PriceEstimate:
    """Exact lattice price of a European contract (std_error 0)."""
    root = lattice_node_values(model, contract, spot)[0][0]
    return PriceEstimate(float(root), 0.0, PricingMethod.LATTICE)


def mc_price(null_sampler: Callable[[np.random.Generator, int], np.ndarray],
             process: Callable[[np.ndarray], float],
             contract: Contract,
             n: int,
             seed: int) -> PriceEstimate:
    """Monte Carlo price: sample mean of the payoff over simulated wealths.

    Parameters
    ----------
    null_sampler : callable(rng, size) -> outcomes
        Draws outcomes from the null measure (the risk-neutral measure).
    process : callable(outcomes) -> terminal wealth
        Evolves one replication's wealth to the contract expiry.
    n : int
        Number of replications, at least 2.
    seed : int
        Stream seed; replication i always uses the stream (seed, i), so the
        estimate is reproducible under any execution schedule.
    """
    if n < 2:
        raise ValueError(f"need at least 2 replications, got {n}")
    payoffs = np.empty(n)
    for i in range(n):
        rng = stream(seed, i)
        outcomes = null_sampler(rng, contract.expiry)
        payoffs[i] = contract.payoff(float(process(outcomes)))
    value = float(payoffs.mean())
    se = float(payoffs.std(ddof=1) / math.sqrt(n))
    return PriceEstimate(value, se, PricingMethod.MONTE_CARLO)


def black_scholes_call(spot: float, strike: float, sigma: float,
                       time_to_expiry: float) -> float:
    """Zero-rate Black-Scholes call value.

    spot*Phi(d1) - strike*Phi(d2) with
    d1 = (ln(spot/strike) + sigma**2 * dt / 2) / (sigma*sqrt(dt)),
    d2 = d1 - sigma*sqrt(dt).
    """
    if spot <= 0.0 or strike <= 0.0:
        raise ValueError("spot and strike must be positive")
    if sigma <= 0.0 or time_to_expiry <= 0.0:
        raise ValueError("volatility and time to expiry must be positive")
    vol = sigma * math.sqrt(time_to_expiry)
    d1 = (math.log(spot / strike) + 0.5 * sigma * sigma * time_to_expiry) / vol
    d2 = d1 - vol
    return spot * norm.cdf(d1) - strike * norm.cdf(d2)


def black_scholes_put(spot: float, strike: float, sigma: float,
                      time_to_expiry: float) -> float:
    """Zero-rate put via parity: strike - spot + call."""
    return strike - spot + black_scholes_call(spot, strike, sigma, time_to_expiry)


def solve_hedge_strike(model: LatticeModel, floor: float, horizon: int,
                       spot: float = 1.0,
                       domain: tuple[float, float] = (1e-6, 4.0),
                       grid_points: int = 10_000,
                       tol: float = 1e-5) -> list[float]:
    """All strikes S > 0 with (1 - C(S)) * S = floor.

    C(S) is the price of the horizon-expiry put at strike S: buying the put
    for C and keeping the rest invested leaves exactly (1 - C(S))*S in the
    worst case, so a root makes that worst case equal the desired floor.
    Roots are found by sign-bracketing on a grid over `domain` followed by
    bisection to `tol`, and returned in increasing order.
    """
    if floor >= 1.0:
        raise ValueError(f"floor {floor} must be below the initial wealth 1")
    if horizon > model.steps:
        raise ValueError(f"horizon {horizon} exceeds lattice depth {model.steps}")

    def residual(s: float) -> float:
        c = lattice_price(model, Contract.put(s, horizon), spot).value
        return (1.0 - c) * s - floor

    grid = np.linspace(domain[0], domain[1], grid_points)
    vals = np.array([residual(s) for s in grid])
    roots = []
    for i in range(grid_points - 1):
        lo, hi = vals[i], vals[i + 1]
        if lo == 0.0:
            roots.append(float(grid[i]))
        elif lo * hi < 0.0:
            roots.append(float(bisect(residual, grid[i], grid[i + 1], xtol=tol / 10)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    if not roots:
        raise StrikeSolveError(
            f"no strike in ({domain[0]}, {domain[1]}] reaches floor {floor} "
            f"at horizon {horizon}")
    return roots


def mc_put_strike_solve(terminal_samples: np.ndarray, floor: float,
                        domain: tuple[float, float] = (1e-6, 4.0),
                        grid_points: int = 2_000,
                        tol: float = 1e-6) -> list[tuple[float, float]]:
    """Strike roots of (1 - C(S))*S = floor with C(S) Monte Carlo priced.

    Uses a fixed sample of terminal wealths for every strike (common random
    numbers), so the residual is continuous in S and bracketing is stable.
    Returns (strike, put price) pairs in increasing strike order; empty when
    the floor is unattainable at any strike.
    """
    kt = np.asarray(terminal_samples, dtype=float)

    def residual(s: float) -> float:
        return (1.0 - float(np.maximum(s - kt, 0.0).mean())) * s - floor

    grid = np.linspace(domain[0], domain[1], grid_points)
    vals = np.array([residual(s) for s in grid])
    roots = []
    for i in range(grid_points - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(float(bisect(residual, grid[i], grid[i + 1], xtol=tol)))
    return [(s, float(np.maximum(s - kt, 0.0).mean())) for s in roots]

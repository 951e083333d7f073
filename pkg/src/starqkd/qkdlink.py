"""Point-to-point QKD link model.

Rates follow the standard fiber budget: an attenuation of a dB/km over
d km passes a fraction 10^(-a*d/10) of the photons, and the sifted
stream distills secret bits at the asymptotic BB84 fraction
max(0, 1 - 2*h(qber)). Post-processing costs classical CPU per raw bit
and burns authentication key per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, InsufficientKey
from .keycore import AuthBudget, KeyPool, Provenance


@dataclass(frozen=True)
class LinkParams:
    """Static hardware and protocol parameters of one link."""

    distance_km: float
    source_rate_hz: float
    detector_efficiency: float
    qber: float
    attenuation_db_per_km: float = 0.2
    sifting_factor: float = 0.5
    cpu_cost_per_raw_bit: float = 1.0
    post_processing_messages_per_round: int = 4

    def __post_init__(self) -> None:
        if self.distance_km < 0:
            raise ValueError(f"distance_km must be >= 0, got {self.distance_km}")
        if self.source_rate_hz < 0:
            raise ValueError(f"source_rate_hz must be >= 0, got {self.source_rate_hz}")
        if not 0 <= self.detector_efficiency <= 1:
            raise ValueError(f"detector_efficiency outside [0, 1]: {self.detector_efficiency}")
        if not 0 <= self.sifting_factor <= 1:
            raise ValueError(f"sifting_factor outside [0, 1]: {self.sifting_factor}")
        if not 0 <= self.qber <= 0.5:
            raise ValueError(f"qber outside [0, 0.5]: {self.qber}")
        if self.attenuation_db_per_km < 0:
            raise ValueError(f"attenuation_db_per_km must be >= 0, got {self.attenuation_db_per_km}")
        if self.cpu_cost_per_raw_bit < 0:
            raise ValueError(f"cpu_cost_per_raw_bit must be >= 0, got {self.cpu_cost_per_raw_bit}")
        if self.post_processing_messages_per_round < 0:
            raise ValueError(
                f"post_processing_messages_per_round must be >= 0, "
                f"got {self.post_processing_messages_per_round}"
            )


def raw_rate(params: LinkParams) -> float:
    """Sifted detection rate in bits per second."""
    loss = 10.0 ** (-params.attenuation_db_per_km * params.distance_km / 10.0)
    return params.source_rate_hz * params.sifting_factor * params.detector_efficiency * loss


def binary_entropy(q: float) -> float:
    """Shannon entropy of a bit with error probability q."""
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"binary_entropy needs q in [0, 1], got {q}")
    if q == 0.0 or q == 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def secret_fraction(q: float) -> float:
    """Asymptotic BB84 secret fraction, zero at and past the ~11% QBER cliff."""
    if not 0.0 <= q <= 0.5:
        raise DomainError(f"secret_fraction needs q in [0, 0.5], got {q}")
    return max(0.0, 1.0 - 2.0 * binary_entropy(q))


def secret_rate(params: LinkParams) -> float:
    """Distilled secret-key rate in bits per second."""
    return raw_rate(params) * secret_fraction(params.qber)


@dataclass
class LinkState:
    """Mutable per-link runtime state: pool, auth budget, carries."""

    params: LinkParams
    pool: KeyPool
    auth: AuthBudget
    cumulative_cpu_cost: float = 0.0
    halted_ticks: int = 0
    # Sub-bit production carried between deposits; keeps long runs
    # partition-invariant (two half ticks land the same bits as one).
    pending_bits: Fraction = field(default_factory=lambda: Fraction(0))


@dataclass(frozen=True)
class TickOutcome:
    """What one production interval did to a link."""

    produced_bits: Fraction
    deposited_bits: int
    cpu_cost: float
    auth_bits_from_budget: int
    auth_bits_from_pool: int
    halted: bool


def produce(state: LinkState, dt: float, now: float = 0.0) -> TickOutcome:
    """Run one post-processing round: pay auth, distill bits, charge CPU.

    The produced bits are returned exactly (as a Fraction) and not yet
    deposited; callers release them, possibly throttled, via release().
    Auth is paid from the reserved budget first and then from the link's
    own pool. If neither covers the round, the link halts for this
    interval and produces nothing.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    params = state.params
    messages = params.post_processing_messages_per_round
    from_budget = 0
    from_pool = 0
    if messages > 0:
        cost_bits = messages * state.auth.tag_cost_bits
        shortfall = max(0, cost_bits - state.auth.reserved_bits)
        if shortfall > 0:
            try:
                km = state.pool.draw(shortfall, Provenance.QUANTUM, created_at=now)
            except InsufficientKey:
                state.halted_ticks += 1
                return TickOutcome(Fraction(0), 0, 0.0, 0, 0, True)
            km.mark_consumed()  # spent as authentication tags
            state.auth.deposit(shortfall)
        state.auth.consume(messages)
        from_pool = shortfall
        from_budget = cost_bits - shortfall
    produced = Fraction(secret_rate(params)) * Fraction(dt)
    cpu = params.cpu_cost_per_raw_bit * raw_rate(params) * dt
    state.cumulative_cpu_cost += cpu
    return TickOutcome(produced, 0, cpu, from_budget, from_pool, False)


def release(state: LinkState, bits: Fraction) -> int:
    """Stage produced bits and deposit the whole part into the pool."""
    if bits < 0:
        raise ValueError(f"cannot release negative bits: {bits}")
    state.pending_bits += bits
    whole = int(state.pending_bits)
    if whole > 0:
        state.pool.deposit(whole)
        state.pending_bits -= whole
    return whole


def tick(state: LinkState, dt: float, now: float = 0.0) -> TickOutcome:
    """produce() immediately followed by an unthrottled release()."""
    out = produce(state, dt, now)
    if out.halted:
        return out
    deposited = release(state, out.produced_bits)
    return TickOutcome(
        produced_bits=out.produced_bits,
        deposited_bits=deposited,
        cpu_cost=out.cpu_cost,
        auth_bits_from_budget=out.auth_bits_from_budget,
        auth_bits_from_pool=out.auth_bits_from_pool,
        halted=False,
    )

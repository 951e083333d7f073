"""Hybrid classical-quantum cipher state and security-horizon estimates.

A long-lived master key is periodically XOR-mixed with fresh quantum
material; a session key encrypts traffic between rotations. The horizon
model asks two questions: how long until brute force breaks one session
key (t_s), and how much longer does rotating the master at frequency f
protect an asset recorded today (t_sq).
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

from .errors import ClockRegression, MissingKey
from .keycore import KeyMaterial, mix_keys, xor_bytes

YEAR_SECONDS = 31_557_600.0  # Julian year
# Horizons longer than this are reported as this sentinel: the model has
# nothing meaningful to say past 1e15 years.
PRACTICALLY_INFINITE_SECONDS = 1e15 * YEAR_SECONDS
HORIZON_MODEL_ID = "additive-coverage-v1"

_KEYSTREAM_DOMAIN = b"starqkd/keystream/v1"


@dataclass(frozen=True)
class AttackerModel:
    """Computational reach of the adversary."""

    classical_ops_per_sec: float
    has_quantum: bool = False
    records_traffic: bool = False

    def __post_init__(self) -> None:
        if self.classical_ops_per_sec <= 0:
            raise ValueError(
                f"classical_ops_per_sec must be positive, got {self.classical_ops_per_sec}"
            )


@dataclass(frozen=True)
class MigrationTimeline:
    """Shelf life x, migration time y, and collapse horizon z, in years."""

    x_years: float
    y_years: float
    z_years: float

    def __post_init__(self) -> None:
        for name in ("x_years", "y_years", "z_years"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class SecurityHorizon:
    """How long data protected now stays secret, in seconds."""

    t_s_seconds: float
    t_sq_seconds: float
    model_id: str = HORIZON_MODEL_ID

    def __post_init__(self) -> None:
        if self.t_s_seconds < 0 or self.t_sq_seconds < self.t_s_seconds:
            raise ValueError(
                f"horizon needs 0 <= t_s <= t_sq, got ({self.t_s_seconds}, {self.t_sq_seconds})"
            )


@dataclass
class HybridCipherState:
    """Mutable cipher state for one branch: master, session, rotation clock."""

    master: KeyMaterial | None
    session: KeyMaterial | None
    rotation_frequency_hz: float = 0.0
    last_rotation_time: float = 0.0
    rotation_count: int = 0
    epoch_log: list[tuple[float, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.rotation_frequency_hz < 0:
            raise ValueError(
                f"rotation_frequency_hz must be >= 0, got {self.rotation_frequency_hz}"
            )


def _keystream(master: bytes, session: bytes, epoch: int, length: int) -> bytes:
    # Length-framed header so (master, session) pairs never collide.
    header = (
        _KEYSTREAM_DOMAIN
        + struct.pack(">I", len(master))
        + master
        + struct.pack(">I", len(session))
        + session
        + struct.pack(">Q", epoch)
    )
    out = bytearray()
    block = 0
    while len(out) < length:
        out += hashlib.sha256(header + struct.pack(">Q", block)).digest()
        block += 1
    return bytes(out[:length])


def encrypt_hybrid(state: HybridCipherState, message: bytes) -> bytes:
    """Encrypt under the current epoch's keystream.

    The keystream is a deterministic function of (master, session,
    rotation_count), so both ends stay in sync as long as they rotate
    together. Master and session keys are long-lived here: hybrid
    encryption does not consume them.
    """
    if state.master is None or state.session is None:
        raise MissingKey("hybrid state needs both a master and a session key")
    ks = _keystream(state.master.bits, state.session.bits, state.rotation_count, len(message))
    return xor_bytes(message, ks)


def decrypt_hybrid(state: HybridCipherState, ciphertext: bytes) -> bytes:
    """Inverse of encrypt_hybrid (the keystream cipher is an involution)."""
    return encrypt_hybrid(state, ciphertext)


def due_rotations(state: HybridCipherState, now: float) -> int:
    """How many rotations the schedule owes between the last one and now.

    Floors (now - last) * f with a one-part-in-1e12 upward nudge so that
    boundaries meant to be exact (a 7-day gap at one rotation per day)
    are not lost to float rounding.
    """
    if now < state.last_rotation_time:
        raise ClockRegression(
            f"now={now} precedes last rotation at {state.last_rotation_time}"
        )
    f = state.rotation_frequency_hz
    if f <= 0:
        return 0
    raw = (now - state.last_rotation_time) * f
    return int(math.floor(raw + raw * 1e-12))


def rotate_master(state: HybridCipherState, k_q: KeyMaterial, now: float) -> HybridCipherState:
    """Mix fresh quantum material into the master key.

    Consumes k_q, bumps the epoch, and logs it. Time may not run
    backwards. State is updated in place and returned.
    """
    if state.master is None:
        raise MissingKey("cannot rotate a state with no master key")
    if now < state.last_rotation_time:
        raise ClockRegression(
            f"now={now} precedes last rotation at {state.last_rotation_time}"
        )
    base = state.master.id.split("@", 1)[0]
    new_master = mix_keys(
        state.master, k_q, new_id=f"{base}@e{state.rotation_count + 1}", created_at=now
    )
    state.master = new_master
    state.rotation_count += 1
    state.last_rotation_time = now
    state.epoch_log.append((now, new_master.id))
    return state


def estimate_t_s(session_key_bits: int, attacker: AttackerModel) -> float:
    """Expected time to exhaust a session key's space, in seconds.

    A quantum attacker gets the Grover square-root speedup (effective
    bits halve). Saturates at the practically-infinite sentinel.
    """
    if session_key_bits <= 0:
        raise ValueError(f"session_key_bits must be positive, got {session_key_bits}")
    effective = session_key_bits / 2.0 if attacker.has_quantum else float(session_key_bits)
    try:
        t = 2.0**effective / attacker.classical_ops_per_sec
    except OverflowError:
        return PRACTICALLY_INFINITE_SECONDS
    return min(t, PRACTICALLY_INFINITE_SECONDS)


def _coverage_seconds(rotation_frequency_hz: float, lifetime_seconds: float) -> float:
    # Extra protected time that rotation buys over an asset lifetime L.
    # High-frequency regime (f*L > 2): L - 1/f, approaching L as f grows.
    # Low-frequency regime (f*L <= 2): the tangent extension f*L^2/4,
    # which keeps coverage positive and strictly increasing for every
    # f > 0 and joins the other branch smoothly at f*L = 2.
    if rotation_frequency_hz <= 0 or lifetime_seconds <= 0:
        return 0.0
    fl = rotation_frequency_hz * lifetime_seconds
    if fl <= 2.0:
        return rotation_frequency_hz * lifetime_seconds * lifetime_seconds / 4.0
    return lifetime_seconds - 1.0 / rotation_frequency_hz


def horizon_for(
    session_key_bits: int,
    rotation_frequency_hz: float,
    attacker: AttackerModel,
    asset_lifetime_seconds: float,
) -> SecurityHorizon:
    """Security horizon for a keying discipline, not a whole state."""
    if rotation_frequency_hz < 0:
        raise ValueError(f"rotation_frequency_hz must be >= 0, got {rotation_frequency_hz}")
    if asset_lifetime_seconds < 0:
        raise ValueError(f"asset_lifetime_seconds must be >= 0, got {asset_lifetime_seconds}")
    t_s = estimate_t_s(session_key_bits, attacker)
    cover = min(
        asset_lifetime_seconds,
        _coverage_seconds(rotation_frequency_hz, asset_lifetime_seconds),
    )
    # Both horizons saturate at the sentinel; below it, any f > 0 buys a
    # strictly positive margin over t_s.
    t_sq = min(t_s + cover, PRACTICALLY_INFINITE_SECONDS)
    return SecurityHorizon(t_s_seconds=t_s, t_sq_seconds=t_sq)


def estimate_t_sq(
    state: HybridCipherState,
    attacker: AttackerModel,
    asset_lifetime_seconds: float,
) -> SecurityHorizon:
    """Security horizon of a hybrid cipher state under rotation.

    t_sq grows strictly with the rotation frequency: each rotation
    re-keys the stream, so a recorded ciphertext archive ages out of a
    single brute-force target. With no rotation t_sq collapses to t_s.
    """
    if state.session is None:
        raise MissingKey("horizon estimate needs a session key")
    return horizon_for(
        state.session.bit_length,
        state.rotation_frequency_hz,
        attacker,
        asset_lifetime_seconds,
    )


def mosca_at_risk(timeline: MigrationTimeline) -> bool:
    """True when shelf life plus migration time overruns the collapse horizon.

    The boundary x + y == z counts as not at risk.
    """
    return timeline.x_years + timeline.y_years > timeline.z_years

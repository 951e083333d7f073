"""Hub-and-spoke key distribution: scheduling, trusted relay, CPU throttle.

Every branch shares one QKD link with the hub. Branch pairs get keys by
trusted relay: the hub invents a fresh key and one-time-pads it down
both spokes, so each relayed bit costs one pool bit at each endpoint.
The hub's receiver bank and post-processing CPU are shared, finite
resources; scheduling and throttling live here.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import DuplicateId, InsufficientKey, NoBranches
from .keycore import KeyMaterial, KeyPool, AuthBudget, Provenance, xor_bytes
from .qkdlink import LinkParams, LinkState, produce, release
from .rng import random_bits


class NodeKind(Enum):
    HUB = "hub"
    BRANCH = "branch"


@dataclass(frozen=True)
class Node:
    """A site in the star; hubs carry the shared resource limits."""

    id: str
    kind: NodeKind
    channel_count: int | None = None
    cpu_capacity_per_sec: float | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("node id must be non-empty")
        if self.kind is NodeKind.HUB:
            if self.channel_count is None or self.channel_count < 1:
                raise ValueError(f"hub needs channel_count >= 1, got {self.channel_count}")
            if self.cpu_capacity_per_sec is None or self.cpu_capacity_per_sec <= 0:
                raise ValueError(
                    f"hub needs positive cpu_capacity_per_sec, got {self.cpu_capacity_per_sec}"
                )


@dataclass
class BranchSpec:
    """Everything needed to stand up one hub-to-branch link."""

    node: Node
    link: LinkParams
    auth_reserved_bits: int = 65536
    auth_tag_cost_bits: int = 128
    pool_target_bits: int = 1_000_000
    pool_rng: random.Random | None = None


@dataclass(frozen=True)
class RelayRecord:
    """Audit entry for one hub-mediated key delivery."""

    branch_i: str
    branch_j: str
    bits: int
    time: float
    key_id: str


@dataclass
class _BacklogItem:
    link_id: str
    cost: Fraction
    bits: Fraction


@dataclass
class StarTopology:
    """One hub, its branches, and the per-branch link states."""

    hub: Node
    branches: list[Node]
    links: dict[str, LinkState]
    backlog: list[_BacklogItem] = field(default_factory=list)
    relay_count: int = 0
    _rr_offset: int = field(default=0, repr=False)

    def branch_ids(self) -> list[str]:
        return [b.id for b in self.branches]

    def link(self, branch_id: str) -> LinkState:
        got = self.links.get(branch_id)
        if got is None:
            raise KeyError(f"no branch {branch_id!r} in this star")
        return got

    @property
    def backlog_cost(self) -> Fraction:
        return sum((item.cost for item in self.backlog), Fraction(0))


def build_star(hub: Node, branch_specs: list[BranchSpec]) -> StarTopology:
    """Wire up a star; ids must be unique and at least one branch given."""
    if hub.kind is not NodeKind.HUB:
        raise ValueError(f"node {hub.id!r} is not a hub")
    if not branch_specs:
        raise NoBranches("a star topology needs at least one branch")
    links: dict[str, LinkState] = {}
    branches: list[Node] = []
    seen = {hub.id}
    for spec in branch_specs:
        node = spec.node
        if node.kind is not NodeKind.BRANCH:
            raise ValueError(f"node {node.id!r} is not a branch")
        if node.id in seen:
            raise DuplicateId(f"duplicate node id {node.id!r}")
        seen.add(node.id)
        branches.append(node)
        links[node.id] = LinkState(
            params=spec.link,
            pool=KeyPool(
                link_id=node.id,
                target_bits=spec.pool_target_bits,
                rng=spec.pool_rng,
            ),
            auth=AuthBudget(
                reserved_bits=spec.auth_reserved_bits,
                tag_cost_bits=spec.auth_tag_cost_bits,
            ),
        )
    return StarTopology(hub=hub, branches=branches, links=links)


def schedule_channels(topology: StarTopology, now: float = 0.0) -> list[str]:
    """Pick which links get the hub's receiver channels this interval.

    Emptiest pools first (lowest fill ratio); ties rotate round-robin so
    equally needy branches take strict turns. Advances the rotation
    pointer once per call. now is accepted for symmetry with the other
    stepping calls; the decision depends only on pool state.
    """
    del now
    ids = topology.branch_ids()
    n = len(ids)
    offset = topology._rr_offset % n
    topology._rr_offset += 1
    rank = {bid: (i - offset) % n for i, bid in enumerate(ids)}
    order = sorted(ids, key=lambda bid: (topology.links[bid].pool.fill_ratio, rank[bid]))
    return order[: topology.hub.channel_count]


def relay_key(
    topology: StarTopology,
    branch_i: str,
    branch_j: str,
    n_bits: int,
    rng: random.Random,
    now: float = 0.0,
) -> tuple[KeyMaterial, KeyMaterial, RelayRecord]:
    """Deliver one fresh shared key to two branches via the trusted hub.

    The hub draws an n-bit pad from each endpoint's pool, XORs a fresh
    key onto each, and the endpoints strip their pads. Both deliveries
    carry identical bits; total pool cost is exactly 2 * n_bits. Fails
    atomically: a short pool on either side leaves both untouched.
    """
    if branch_i == branch_j:
        raise ValueError(f"relay endpoints must differ, got {branch_i!r} twice")
    if n_bits <= 0:
        raise ValueError(f"n_bits must be positive, got {n_bits}")
    link_i = topology.link(branch_i)
    link_j = topology.link(branch_j)
    for bid, link in ((branch_i, link_i), (branch_j, link_j)):
        if link.pool.available_bits < n_bits:
            raise InsufficientKey(
                f"pool {bid}: relay needs {n_bits} bits, "
                f"only {link.pool.available_bits} available"
            )
    fresh = random_bits(rng, n_bits)
    topology.relay_count += 1
    key_id = f"relay-{topology.relay_count:06d}"
    delivered = []
    for bid, link in ((branch_i, link_i), (branch_j, link_j)):
        pad = link.pool.draw(n_bits, Provenance.QUANTUM, created_at=now)
        wire = xor_bytes(fresh, pad.bits)  # what the hub transmits
        plain = xor_bytes(wire, pad.bits)  # what the branch recovers
        pad.mark_consumed()
        delivered.append(
            KeyMaterial(
                id=f"{key_id}/{bid}",
                bits=plain,
                bit_length=n_bits,
                provenance=Provenance.RELAYED,
                created_at=now,
            )
        )
    record = RelayRecord(
        branch_i=branch_i, branch_j=branch_j, bits=n_bits, time=now, key_id=key_id
    )
    return delivered[0], delivered[1], record


@dataclass(frozen=True)
class HubStepReport:
    """What one hub CPU interval processed, deferred, and deposited."""

    time: float
    active_ids: tuple[str, ...]
    deposited: dict[str, int]
    halted: tuple[str, ...]
    auth_bits_from_pool: dict[str, int]
    auth_bits_from_budget: dict[str, int]
    cpu_demanded: float
    cpu_processed: float
    deferred_cost: float
    backlog_cost_after: float


def hub_cpu_step(
    topology: StarTopology,
    dt: float,
    active_ids: list[str] | None = None,
    now: float = 0.0,
) -> HubStepReport:
    """Run production on the active links under the hub's CPU budget.

    Backlogged work from earlier intervals drains first, FIFO. If this
    interval's fresh work then overruns what is left of the budget,
    every active link is served the same fraction of its bits and the
    remainder joins the backlog. Bit accounting is exact: deferred bits
    are deposited, in order, by later steps.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if active_ids is None:
        actives = topology.branch_ids()
    else:
        known = set(topology.branch_ids())
        for bid in active_ids:
            if bid not in known:
                raise KeyError(f"no branch {bid!r} in this star")
        actives = list(active_ids)

    released: dict[str, Fraction] = {}
    halted: list[str] = []
    auth_pool: dict[str, int] = {}
    auth_budget: dict[str, int] = {}
    new_items: list[_BacklogItem] = []
    demanded = 0.0
    for bid in actives:
        out = produce(topology.links[bid], dt, now)
        if out.halted:
            halted.append(bid)
            continue
        auth_pool[bid] = out.auth_bits_from_pool
        auth_budget[bid] = out.auth_bits_from_budget
        demanded += out.cpu_cost
        new_items.append(_BacklogItem(bid, Fraction(out.cpu_cost), out.produced_bits))

    budget = Fraction(topology.hub.cpu_capacity_per_sec) * Fraction(dt)
    processed = Fraction(0)

    # Old work first, in arrival order.
    while topology.backlog and budget > 0:
        item = topology.backlog[0]
        if item.cost <= budget:
            budget -= item.cost
            processed += item.cost
            released[item.link_id] = released.get(item.link_id, Fraction(0)) + item.bits
            topology.backlog.pop(0)
        else:
            share = budget / item.cost
            served = item.bits * share
            released[item.link_id] = released.get(item.link_id, Fraction(0)) + served
            item.bits -= served
            processed += budget
            item.cost -= budget
            budget = Fraction(0)

    # Then this interval's production, proportionally if it overruns.
    total_new = sum((item.cost for item in new_items), Fraction(0))
    if total_new <= budget:
        for item in new_items:
            released[item.link_id] = released.get(item.link_id, Fraction(0)) + item.bits
        processed += total_new
        deferred = Fraction(0)
    else:
        share = budget / total_new if total_new > 0 else Fraction(0)
        for item in new_items:
            served = item.bits * share
            released[item.link_id] = released.get(item.link_id, Fraction(0)) + served
            topology.backlog.append(
                _BacklogItem(item.link_id, item.cost * (1 - share), item.bits - served)
            )
        processed += budget
        deferred = total_new - budget

    deposited = {
        bid: release(topology.links[bid], bits) for bid, bits in released.items()
    }
    return HubStepReport(
        time=now,
        active_ids=tuple(actives),
        deposited=deposited,
        halted=tuple(halted),
        auth_bits_from_pool=auth_pool,
        auth_bits_from_budget=auth_budget,
        cpu_demanded=demanded,
        cpu_processed=float(processed),
        deferred_cost=float(deferred),
        backlog_cost_after=float(topology.backlog_cost),
    )

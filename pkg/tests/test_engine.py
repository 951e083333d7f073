"""End-to-end simulation runs: determinism, conservation, scheduling."""

from fractions import Fraction

import pytest

from starqkd.engine import EventKind, run
from starqkd.scenario import ingest_scenario, scenario_from_dict, with_overrides


def small_scenario(**over) -> dict:
    data = {
        "seed": 5,
        "duration_seconds": 50.0,
        "tick_seconds": 1.0,
        "branches": [
            {"id": "b1", "distance_km": 10.0, "qber": 0.02},
            {"id": "b2", "distance_km": 15.0, "qber": 0.015},
            {"id": "b3", "distance_km": 20.0, "qber": 0.025},
        ],
    }
    data.update(over)
    return data


def categories_total(report) -> int:
    return sum(report.totals["consumed_bits"].values())


def test_same_seed_same_report():
    s = scenario_from_dict(small_scenario())
    a = run(s, collect_trace=True)
    b = run(s, collect_trace=True)
    assert a.to_json() == b.to_json()
    assert a.event_trace == b.event_trace


def test_different_seed_different_report():
    s = scenario_from_dict(
        small_scenario(
            traffic=[{"src": "b1", "dst": "b2", "otp_bits_per_sec": 64.0}],
        )
    )
    a = run(s)
    b = run(with_overrides(s, seed=6))
    assert a.to_json() != b.to_json()
    # the relay ledger fingerprints are what differ, not just counters
    fp_a = {e["key_fingerprint"] for e in a.relay_ledger}
    fp_b = {e["key_fingerprint"] for e in b.relay_ledger}
    assert fp_a.isdisjoint(fp_b)


def test_conservation_closes_with_everything_on():
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=60.0,
            branches=[
                {"id": "b1", "rotation_frequency_hz": 0.1, "auth_reserved_bits": 512},
                {"id": "b2", "rotation_frequency_hz": 0.05},
                {"id": "b3"},
            ],
            traffic=[
                {"src": "b1", "dst": "b2", "otp_bits_per_sec": 96.0},
                {"src": "b2", "dst": "b3", "relay_bits": 512, "relay_interval_seconds": 15.0},
            ],
            sharing=[
                {
                    "id": "vault",
                    "n_locations": 4,
                    "threshold_k": 2,
                    "refresh_period_seconds": 20.0,
                    "custodians": ["b1", "b3"],
                }
            ],
        )
    )
    r = run(s)
    t = r.totals
    assert t["generated_bits"] == t["pool_available_bits"] + t["consumed_bits_total"]
    assert t["consumed_bits_total"] == categories_total(r)
    for category in ("auth", "otp_traffic", "relay", "rotation", "refresh"):
        assert t["consumed_bits"][category] > 0


def test_idle_network_pool_growth_closed_form():
    # no consumers: ten ticks bank exactly floor(10 x secret rate)
    s = scenario_from_dict({"duration_seconds": 10.0, "branches": [{"id": "solo"}]})
    r = run(s)
    rate = Fraction(r.links["solo"]["secret_rate_bps"])
    expected = int(rate * 10)
    assert r.links["solo"]["pool"]["available_bits"] == expected
    assert r.links["solo"]["pool"]["generated_bits"] == expected
    assert r.totals["consumed_bits_total"] == 0


def test_channel_cap_and_round_robin_fairness():
    s = scenario_from_dict(small_scenario(hub={"channel_count": 1}))
    r = run(s)
    counts = r.hub["series"]["active_link_count"]
    assert all(c <= 1 for c in counts)
    # with equal empty pools the rotating tie-break visits everyone early
    for bid in ("b1", "b2", "b3"):
        assert sum(r.links[bid]["series"]["active"][:3]) >= 1


def test_rotation_schedule_and_accounting():
    s = scenario_from_dict(
        small_scenario(
            branches=[{"id": "b1", "rotation_frequency_hz": 0.1, "master_bits": 256}],
        )
    )
    r = run(s)
    assert r.rotations["b1"]["count"] == 5  # 50 s at one per 10 s
    assert len(r.rotations["b1"]["epochs"]) == 5
    assert r.totals["consumed_bits"]["rotation"] == 5 * 256


def test_otp_traffic_byte_quantized_service():
    # 4 bits per second turns into one whole byte every other tick
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=10.0,
            branches=[{"id": "b1"}, {"id": "b2"}],
            traffic=[{"src": "b1", "dst": "b2", "otp_bits_per_sec": 4.0}],
        )
    )
    r = run(s)
    flows = r.links["b1"]["flows_out"]
    assert flows == [{"flow": "b1->b2", "served_bits": 40, "unmet_bits": 0}]
    assert r.totals["otp_message_bits"] == 40
    assert r.totals["consumed_bits"]["otp_traffic"] == 80  # both endpoint pools pay


def test_relay_requests_delivered_on_interval():
    s = scenario_from_dict(
        small_scenario(
            traffic=[
                {"src": "b1", "dst": "b3", "relay_bits": 256, "relay_interval_seconds": 10.0}
            ],
        )
    )
    r = run(s)
    deliveries = [e for e in r.relay_ledger if e["purpose"] == "relay_request"]
    assert len(deliveries) == 5
    assert all(e["bits"] == 256 for e in deliveries)
    assert [e["time"] for e in deliveries] == [10.0, 20.0, 30.0, 40.0, 50.0]
    assert r.totals["relay_delivered_bits"] == 5 * 256
    assert r.totals["consumed_bits"]["relay"] == 2 * 5 * 256


def test_relay_interval_between_ticks():
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=10.0,
            traffic=[
                {"src": "b1", "dst": "b2", "relay_bits": 64, "relay_interval_seconds": 2.5}
            ],
        )
    )
    r = run(s, collect_trace=True)
    deliveries = [e for e in r.relay_ledger if e["purpose"] == "relay_request"]
    assert [e["time"] for e in deliveries] == [2.5, 5.0, 7.5, 10.0]
    times = [t for t, _, _, _ in r.event_trace]
    assert times == sorted(times)


def test_refresh_rounds_and_budget():
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=60.0,
            sharing=[
                {
                    "id": "vault",
                    "n_locations": 5,
                    "threshold_k": 3,
                    "field_prime": 2305843009213693951,
                    "refresh_period_seconds": 20.0,
                    "custodians": ["b1", "b2"],
                }
            ],
        )
    )
    r = run(s)
    info = r.sharing["vault"]
    cost = 5 * 4 * 61
    assert info["rounds_completed"] == 3
    assert info["deferrals"] == 0
    assert info["reconstruct_ok"]
    assert info["refresh_cost_bits"] == cost
    assert r.totals["consumed_bits"]["refresh"] == 3 * 2 * cost
    ok = [e for e in r.refresh_ledger if e["status"] == "ok"]
    assert [e["round"] for e in ok] == [1, 2, 3]
    assert all(e["exposure_seconds"] == 20.0 for e in ok)


def test_refresh_deferred_when_pools_starved():
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=10.0,
            branches=[
                {"id": "b1", "distance_km": 200.0},
                {"id": "b2", "distance_km": 200.0},
            ],
            sharing=[
                {
                    "id": "vault",
                    "n_locations": 5,
                    "threshold_k": 3,
                    "field_prime": 2305843009213693951,
                    "refresh_period_seconds": 1.0,
                    "custodians": ["b1", "b2"],
                }
            ],
        )
    )
    r = run(s)
    info = r.sharing["vault"]
    assert info["rounds_completed"] == 0
    assert info["deferrals"] == 10
    assert info["max_exposure_seconds"] == 10.0  # never refreshed over the whole run
    assert info["reconstruct_ok"]
    assert any(u["kind"] == "refresh" for u in r.unmet_demand)
    t = r.totals
    assert t["generated_bits"] == t["pool_available_bits"] + t["consumed_bits_total"]


def test_starved_traffic_logs_unmet_and_still_conserves():
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=20.0,
            branches=[
                {"id": "b1", "distance_km": 120.0},
                {"id": "b2", "distance_km": 120.0},
            ],
            traffic=[{"src": "b1", "dst": "b2", "otp_bits_per_sec": 100000.0}],
        )
    )
    r = run(s)
    flow = r.links["b1"]["flows_out"][0]
    assert flow["unmet_bits"] > 0
    assert any(u["kind"] == "otp_traffic" for u in r.unmet_demand)
    t = r.totals
    assert t["generated_bits"] == t["pool_available_bits"] + t["consumed_bits_total"]
    assert t["consumed_bits_total"] == categories_total(r)


def test_auth_runs_budget_down_then_pool_then_halts():
    # 512 reserved bits cover exactly one tick of 4 tagged messages
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=5.0,
            branches=[
                {
                    "id": "far",
                    "distance_km": 250.0,
                    "auth_reserved_bits": 512,
                }
            ],
        )
    )
    r = run(s)
    link = r.links["far"]
    assert link["halted_ticks"] > 0
    assert any(u["kind"] == "auth" and u["entity"] == "far" for u in r.unmet_demand)
    t = r.totals
    assert t["generated_bits"] == t["pool_available_bits"] + t["consumed_bits_total"]


def test_hub_throttle_builds_backlog():
    s = scenario_from_dict(
        small_scenario(hub={"channel_count": 3, "cpu_capacity_per_sec": 100.0})
    )
    r = run(s)
    assert r.hub["backlog_cost_final"] > 0
    assert max(r.hub["series"]["backlog_cost"]) > 0
    t = r.totals
    assert t["generated_bits"] == t["pool_available_bits"] + t["consumed_bits_total"]


def test_event_trace_is_ordered_and_prioritized():
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=5.0,
            branches=[{"id": "b1", "rotation_frequency_hz": 1.0}, {"id": "b2"}],
            traffic=[{"src": "b1", "dst": "b2", "otp_bits_per_sec": 16.0}],
        )
    )
    r = run(s, collect_trace=True)
    trace = r.event_trace
    seqs = [seq for _, seq, _, _ in trace]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
    by_time: dict[float, list[str]] = {}
    for t, _, kind, _ in trace:
        by_time.setdefault(t, []).append(kind)
    for kinds in by_time.values():
        ranks = [EventKind[k] for k in kinds]
        assert ranks == sorted(ranks)
    # every whole tick leads with link production
    assert all(kinds[0] == "LINK_TICK" for t, kinds in by_time.items() if t != 5.0 or True)


def test_report_series_lengths_match_ticks():
    s = scenario_from_dict(small_scenario(duration_seconds=25.0))
    r = run(s)
    assert len(r.times) == 25
    for bid in ("b1", "b2", "b3"):
        series = r.links[bid]["series"]
        assert len(series["pool_available"]) == 25
        assert len(series["deposited_bits"]) == 25
        assert len(series["active"]) == 25
    assert len(r.hub["series"]["backlog_cost"]) == 25


def test_shipped_scenario_runs_clean():
    s = ingest_scenario("scenarios/star10.json")
    r = run(s)
    assert r.seed == 42
    assert max(r.hub["series"]["active_link_count"]) <= 2
    assert r.mosca_at_risk is True
    assert {a["id"] for a in r.assets} == {
        "press-kit",
        "ops-telemetry",
        "payroll-records",
        "trade-algorithms",
    }
    by_id = {a["id"]: a for a in r.assets}
    assert by_id["trade-algorithms"]["technique"] == "qkd_otp"
    assert by_id["press-kit"]["technique"] == "classical_public_key"
    t = r.totals
    assert t["generated_bits"] == t["pool_available_bits"] + t["consumed_bits_total"]
    assert t["consumed_bits_total"] == categories_total(r)


def test_fractional_rate_carries_exactly():
    # 12.5 bits per second: bytes should appear without drift
    s = scenario_from_dict(
        small_scenario(
            duration_seconds=40.0,
            branches=[{"id": "b1"}, {"id": "b2"}],
            traffic=[{"src": "b1", "dst": "b2", "otp_bits_per_sec": 12.5}],
        )
    )
    r = run(s)
    flow = r.links["b1"]["flows_out"][0]
    offered = Fraction(25, 2) * 40
    assert flow["served_bits"] == (offered // 8) * 8 == 496
    assert flow["unmet_bits"] == 0

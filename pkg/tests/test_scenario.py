"""Scenario file parsing, validation, and round-tripping."""

import json

import pytest

from starqkd.errors import ParseError, ValidationError
from starqkd.policy import TechniqueKind
from starqkd.scenario import (
    SCENARIO_FORMAT_VERSION,
    ingest_matrix,
    ingest_plan_inputs,
    ingest_scenario,
    scenario_from_dict,
    scenario_to_dict,
    with_overrides,
)


def minimal() -> dict:
    return {"duration_seconds": 10.0, "branches": [{"id": "alpha"}]}


def test_minimal_defaults():
    s = scenario_from_dict(minimal())
    assert s.seed == 0
    assert s.tick_seconds == 1.0
    assert s.tick_count == 10
    assert s.hub.id == "hub"
    assert s.channel_count == 1  # defaults to one receiver per branch
    b = s.branches[0]
    assert b.link.distance_km == 10.0
    assert b.link.attenuation_db_per_km == 0.2
    assert b.rotation_frequency_hz == 0.0
    assert b.master_bits == 256
    assert s.traffic == ()
    assert s.sharing == ()
    assert s.attacker.has_quantum


def test_format_version_mismatch():
    data = minimal()
    data["format_version"] = 99
    with pytest.raises(ValidationError, match="format_version"):
        scenario_from_dict(data)


def test_explicit_format_version_accepted():
    data = minimal()
    data["format_version"] = SCENARIO_FORMAT_VERSION
    scenario_from_dict(data)


def test_missing_duration():
    with pytest.raises(ValidationError, match="duration_seconds"):
        scenario_from_dict({"branches": [{"id": "a"}]})


def test_duration_must_be_whole_ticks():
    data = minimal()
    data["duration_seconds"] = 10.5
    with pytest.raises(ValidationError, match="whole number of ticks"):
        scenario_from_dict(data)
    # within float noise of a whole count is fine
    data["duration_seconds"] = 10.0 * (1 + 1e-13)
    assert scenario_from_dict(data).tick_count == 10


def test_seed_range():
    data = minimal()
    data["seed"] = 2**64
    with pytest.raises(ValidationError, match="64 bits"):
        scenario_from_dict(data)
    data["seed"] = -1
    with pytest.raises(ValidationError):
        scenario_from_dict(data)


def test_bool_is_not_a_number():
    data = minimal()
    data["seed"] = True
    with pytest.raises(ValidationError, match="expected an integer"):
        scenario_from_dict(data)


def test_unknown_key_strict_vs_lax():
    data = minimal()
    data["typo_key"] = 1
    with pytest.raises(ValidationError, match="typo_key"):
        scenario_from_dict(data)
    with pytest.warns(UserWarning, match="typo_key"):
        s = scenario_from_dict(data, strict=False)
    assert s.duration_seconds == 10.0


def test_duplicate_branch_ids():
    data = {"duration_seconds": 5.0, "branches": [{"id": "a"}, {"id": "a"}]}
    with pytest.raises(ValidationError, match="duplicate id"):
        scenario_from_dict(data)


def test_branch_id_clashing_with_hub():
    data = {
        "duration_seconds": 5.0,
        "hub": {"id": "hq"},
        "branches": [{"id": "hq"}],
    }
    with pytest.raises(ValidationError, match="duplicate"):
        scenario_from_dict(data)


def test_negative_distance_names_the_field():
    data = {"duration_seconds": 5.0, "branches": [{"id": "a", "distance_km": -5.0}]}
    with pytest.raises(ValidationError, match="distance_km"):
        scenario_from_dict(data)


def test_no_branches():
    with pytest.raises(ValidationError, match="at least one branch"):
        scenario_from_dict({"duration_seconds": 5.0, "branches": []})


def test_traffic_endpoints_must_exist():
    data = minimal()
    data["traffic"] = [{"src": "alpha", "dst": "ghost", "otp_bits_per_sec": 10}]
    with pytest.raises(ValidationError, match="ghost"):
        scenario_from_dict(data)


def test_traffic_src_dst_differ():
    data = minimal()
    data["traffic"] = [{"src": "alpha", "dst": "alpha", "otp_bits_per_sec": 10}]
    with pytest.raises(ValidationError, match="must differ"):
        scenario_from_dict(data)


def test_relay_fields_come_together():
    data = {"duration_seconds": 5.0, "branches": [{"id": "a"}, {"id": "b"}]}
    data["traffic"] = [{"src": "a", "dst": "b", "relay_bits": 128}]
    with pytest.raises(ValidationError, match="together"):
        scenario_from_dict(data)
    data["traffic"] = [
        {"src": "a", "dst": "b", "relay_bits": 128, "relay_interval_seconds": 2.0}
    ]
    s = scenario_from_dict(data)
    assert s.traffic[0].relay_bits == 128


def test_sharing_custodians_must_exist():
    data = minimal()
    data["sharing"] = [
        {
            "id": "v",
            "n_locations": 3,
            "threshold_k": 2,
            "refresh_period_seconds": 5.0,
            "custodians": ["alpha", "ghost"],
        }
    ]
    with pytest.raises(ValidationError, match="ghost"):
        scenario_from_dict(data)


def test_sharing_custodian_count():
    data = minimal()
    data["sharing"] = [
        {
            "id": "v",
            "n_locations": 3,
            "threshold_k": 2,
            "refresh_period_seconds": 5.0,
            "custodians": ["alpha"],
        }
    ]
    with pytest.raises(ValidationError, match="exactly two"):
        scenario_from_dict(data)


def test_asset_indices_bounded_by_classes():
    data = minimal()
    data["classes"] = {"m_c": 3, "k_t": 3}
    data["assets"] = [
        {
            "id": "x",
            "sensitivity_index": 4,
            "time_index": 1,
            "size_bytes": 1,
            "lifetime_seconds": 0,
            "data_state": "at_rest",
        }
    ]
    with pytest.raises(ValidationError, match="exceeds m_c=3"):
        scenario_from_dict(data)


def test_duplicate_asset_ids():
    data = minimal()
    data["assets"] = [
        {
            "id": "x",
            "sensitivity_index": 1,
            "time_index": 1,
            "size_bytes": 1,
            "lifetime_seconds": 0,
            "data_state": "at_rest",
        }
    ] * 2
    with pytest.raises(ValidationError, match="duplicate id"):
        scenario_from_dict(data)


def full_matrix_2x2(broken_corner: bool = False) -> dict:
    cells = [
        {"sensitivity": 1, "time": 1, "technique": "classical_public_key"},
        {"sensitivity": 1, "time": 2, "technique": "post_quantum"},
        {"sensitivity": 2, "time": 1, "technique": "post_quantum"},
        {"sensitivity": 2, "time": 2, "technique": "hybrid" if broken_corner else "qkd_otp"},
    ]
    return {"m_c": 2, "k_t": 2, "cells": cells}


def test_matrix_parse_and_corner_check():
    data = minimal()
    data["policy_matrix"] = full_matrix_2x2()
    s = scenario_from_dict(data)
    assert s.policy_matrix.cell(2, 2).kind is TechniqueKind.QKD_OTP
    data["policy_matrix"] = full_matrix_2x2(broken_corner=True)
    with pytest.raises(ValidationError, match="must be qkd_otp"):
        scenario_from_dict(data)


def test_matrix_missing_cell():
    data = minimal()
    grid = full_matrix_2x2()
    grid["cells"] = grid["cells"][:3]
    data["policy_matrix"] = grid
    with pytest.raises(ValidationError, match="cell"):
        scenario_from_dict(data)


def test_matrix_duplicate_cell():
    data = minimal()
    grid = full_matrix_2x2()
    grid["cells"].append(grid["cells"][0])
    data["policy_matrix"] = grid
    with pytest.raises(ValidationError, match="defined twice"):
        scenario_from_dict(data)


def test_matrix_dims_must_match_classes():
    data = minimal()
    data["classes"] = {"m_c": 3, "k_t": 2}
    data["policy_matrix"] = full_matrix_2x2()
    with pytest.raises(ValidationError, match="classes say"):
        scenario_from_dict(data)


def test_technique_sizing_only_for_hybrid():
    data = minimal()
    grid = full_matrix_2x2()
    grid["cells"][0] = {
        "sensitivity": 1,
        "time": 1,
        "technique": {"kind": "classical_public_key", "master_bits": 512},
    }
    data["policy_matrix"] = grid
    with pytest.raises(ValidationError, match="no sizing"):
        scenario_from_dict(data)


def test_hybrid_technique_object():
    data = minimal()
    data["assets"] = []
    grid = full_matrix_2x2()
    grid["cells"][1] = {
        "sensitivity": 1,
        "time": 2,
        "technique": {"kind": "hybrid", "rotation_frequency_hz": 0.5},
    }
    # 1,2 must still be above classical, and hybrid qualifies
    s = scenario_from_dict(data | {"policy_matrix": grid})
    cell = s.policy_matrix.cell(1, 2)
    assert cell.kind is TechniqueKind.HYBRID
    assert cell.hybrid.rotation_frequency_hz == 0.5


def test_with_overrides():
    s = scenario_from_dict(minimal())
    s2 = with_overrides(s, seed=99, duration_seconds=20.0)
    assert s2.seed == 99
    assert s2.tick_count == 20
    assert s.seed == 0  # original untouched
    with pytest.raises(ValidationError):
        with_overrides(s, duration_seconds=10.3)
    with pytest.raises(ValidationError):
        with_overrides(s, seed=2**64)


def test_round_trip_shipped_scenario():
    s = ingest_scenario("scenarios/star10.json")
    assert len(s.branches) == 10
    assert s.channel_count == 2
    d = scenario_to_dict(s)
    s2 = scenario_from_dict(d)
    assert s2 == s
    # defaults get materialized on the way out
    assert d["branches"][0]["attenuation_db_per_km"] == 0.2


def test_ingest_rejects_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"duration_seconds": 5.0,}')
    with pytest.raises(ParseError, match="line 1"):
        ingest_scenario(p)


def test_ingest_missing_file(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        ingest_scenario(tmp_path / "nope.json")


def test_ingest_plan_inputs(tmp_path):
    assets, classes, migration = ingest_plan_inputs("scenarios/assets.json")
    assert classes == (4, 4)
    assert migration is not None
    assert {a.id for a in assets} >= {"press-kit", "trade-algorithms"}
    p = tmp_path / "tiny.json"
    p.write_text(
        json.dumps(
            {
                "assets": [
                    {
                        "id": "one",
                        "sensitivity_index": 1,
                        "time_index": 1,
                        "size_bytes": 10,
                        "lifetime_seconds": 0,
                        "data_state": "in_motion",
                    }
                ]
            }
        )
    )
    assets, classes, migration = ingest_plan_inputs(p)
    assert len(assets) == 1 and classes is None and migration is None


def test_ingest_matrix(tmp_path):
    p = tmp_path / "matrix.json"
    p.write_text(json.dumps(full_matrix_2x2()))
    m = ingest_matrix(p)
    assert m.cell(1, 1).kind is TechniqueKind.CLASSICAL_PUBLIC_KEY


def test_attacker_and_migration_blocks():
    data = minimal()
    data["attacker"] = {
        "classical_ops_per_sec": 1e12,
        "has_quantum": False,
        "records_traffic": False,
    }
    data["migration"] = {"x_years": 1.0, "y_years": 2.0, "z_years": 5.0}
    s = scenario_from_dict(data)
    assert s.attacker.classical_ops_per_sec == 1e12
    assert not s.attacker.has_quantum
    assert s.migration.z_years == 5.0
    data["migration"] = {"x_years": -1.0, "y_years": 2.0, "z_years": 5.0}
    with pytest.raises(ValidationError):
        scenario_from_dict(data)

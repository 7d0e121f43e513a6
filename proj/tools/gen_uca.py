#!/usr/bin/env python3
"""Write the unsafe-control-action scenario set into data/scenarios/uca/.

Each scenario exercises one mitigation: the suite runs it with the mitigation
off and on and compares the target monitor.
"""

import json
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "scenarios" / "uca"

BASE = {
    "description": "straight lead, wingman holding the rejoin offset",
    "seed": 7,
    "duration_frames": 800,
}

# (field, scalar, offset) for the sender cross-check rows
INCORRECT = {
    "RL1.5.11": ("position", "position.north", 40.0),
    "RL1.5.13": ("attitude", "roll", 0.05),
    "RL1.5.15": ("orientation_rates", "p", 0.05),
    "RL1.5.16": ("true_airspeed", "true_airspeed", 5.0),
    "RL1.5.18": ("velocity", "velocity.east", 5.0),
    "RL1.5.20": ("acceleration", "acceleration.north", 2.0),
    "RL1.5.22": ("fuel_remaining", "fuel_remaining", 50.0),
    "RL1.5.24": ("calibrated_airspeed", "calibrated_airspeed", 5.0),
    "RL1.5.26": ("normal_acceleration", "normal_acceleration", 0.5),
    "RL1.5.28": ("power_lever_angle", "power_lever_angle", 0.1),
    "RL1.5.30": ("heading", "yaw", 0.05),
    "RL1.5.34": ("wind_velocity", "wind.east", 5.0),
}

MISSING = {
    "RL1.5.12": "position",
    "RL1.5.14": "attitude",
    "RL1.5.17": "true_airspeed",
    "RL1.5.19": "velocity",
    "RL1.5.21": "acceleration",
    "RL1.5.23": "fuel_remaining",
    "RL1.5.25": "calibrated_airspeed",
    "RL1.5.27": "normal_acceleration",
    "RL1.5.29": "power_lever_angle",
    "RL1.5.31": "heading",
    "RL1.5.33": "invalid_flag",
    "RL1.5.35": "wind_velocity",
}


def fault(kind, frm, to, **kw):
    d = {"kind": kind, "from": frm, "to": to}
    d.update(kw)
    return d


def test_point(frame, tp_id="TP1", **kw):
    d = {"frame": frame, "action": "test_point", "id": tp_id}
    d.update(kw)
    return d


def voice(frame, start, end):
    return {"frame": frame, "action": "voice", "payload": "fuel check", "window_start": start, "window_end": end}


SCENARIOS = {
    "RL1.5.1": ("corrupted lead position passes the sender but jumps on arrival",
                {"faults": [fault("field_corruption", 400, 410, target="L1.5", field="position.north", value=2000.0)]}),
    "RL1.5.2": ("datalink silent for 10 s",
                {"faults": [fault("signal_dropout", 300, 400, target="L1.5")]}),
    "RL1.5.3": ("lead samples position 2 s late",
                {"faults": [fault("async_sampling", 300, 400, field="position", value=20)]}),
    "RL1.5.4": ("reports arrive five frames late",
                {"faults": [fault("stale_timestamp", 300, 400, target="L1.5", value=5)]}),
    "RL1.5.5": ("commanded rejoin inside the separation bubble",
                {"test_card": [{"frame": 300, "action": "rejoin_point", "point": [-50.0, 60.0, 0.0]}]}),
    "RL1.5.6": ("rejoin point dropped from reports during a test point",
                {"test_card": [test_point(200, rejoin=[-150.0, 300.0, 0.0], end=700)],
                 "faults": [fault("field_missing", 300, 400, target="L1.5", field="rejoin")]}),
    "RL1.5.7": ("lead clock runs seven frames fast",
                {"faults": [fault("clock_skew", 300, 400, target="lead", value=7)]}),
    "RL1.5.8": ("timestamp dropped from lead reports",
                {"faults": [fault("field_missing", 300, 310, target="L1.5", field="timestamp")]}),
    "RL1.5.9": ("corrupted test point id",
                {"test_card": [test_point(100)],
                 "faults": [fault("field_corruption", 300, 400, target="test_point_id", text="TP9")]}),
    "RL1.5.10": ("test point id missing from reports",
                 {"test_card": [test_point(100)],
                  "faults": [fault("field_missing", 300, 400, target="L1.5", field="test_point_id")]}),
    "RL1.5.32": ("lead raises a spurious invalid flag",
                 {"faults": [fault("component_fault", 300, 310, target="lead_flag", field="position")]}),
    "RL1.5.37": ("voice message lost",
                 {"test_card": [voice(300, 250, 400)],
                  "faults": [fault("signal_dropout", 300, 300, target="voice")]}),
    "RL1.5.41": ("voice message arrives before its window",
                 {"test_card": [voice(200, 300, 400)]}),
    "RL1.5.42": ("voice message arrives after its window",
                 {"test_card": [voice(500, 300, 400)]}),

    "RL2.W1.2": ("controller faults and emits a hard turn",
                 {"controller": {"fault_output": [0.3, 0.0, 0.0]},
                  "faults": [fault("component_fault", 300, 400, target="nncs")]}),
    "RL2.W1.3": ("controller fault",
                 {"faults": [fault("component_fault", 300, 400, target="nncs")]}),
    "RL2.W1.4": ("recorder drops controller frames",
                 {"faults": [fault("recorder_fault", 300, 310, target="W1")]}),
    "RL2.W1.5": ("controller clock skew",
                 {"faults": [fault("clock_skew", 300, 400, target="nncs", value=3)]}),

    "RL2.W2.1": ("formation flown above the RTA design speed",
                 {"lead": {"airspeed": 230.0}, "wingman": {"airspeed": 230.0}}),
    "RL2.W2.2": ("own-state position jumps 800 m",
                 {"faults": [fault("sensor_bias", 600, 800, field="position.east", value=800.0)]}),
    "RL2.W2.3": ("controller output lost briefly",
                 {"faults": [fault("signal_dropout", 300, 320, target="W1")]}),
    "RL2.W2.4": ("controller output lost from the start",
                 {"faults": [fault("signal_dropout", 0, 30, target="W1")]}),
    "RL2.W2.5": ("operator enters a separation of 10 m",
                 {"operator": {"d_min": 10.0}}),
    "RL2.W2.6": ("RTA lanes disagree",
                 {"faults": [fault("component_fault", 300, 400, target="rta_lane_b", value=0.1)]}),
    "RL2.W2.7": ("RTA output corrupted on the wire",
                 {"faults": [fault("field_corruption", 300, 310, target="W2", value=0.3)]}),
    "RL2.W2.9": ("rejoin point in the lead's wake",
                 {"wingman": {"position": [-400.0, 0.0, -3000.0]},
                  "goal": {"rejoin_point": [-400.0, 0.0, 0.0]},
                  "pilot": {"manual_goal": {"rejoin_point": [-150.0, 300.0, 0.0]}}}),
    "RL2.W2.10": ("rejoin turn beyond the protected roll limit",
                  {"constraints": {"envelope": {"max_roll": 0.2}},
                   "test_card": [{"frame": 200, "action": "rejoin_point", "point": [-150.0, -600.0, 0.0]}]}),
    "RL2.W2.11": ("RTA clock skew",
                  {"faults": [fault("clock_skew", 300, 400, target="rta", value=3)]}),
    "RL2.W2.12": ("RTA misses its frame budget",
                  {"faults": [fault("frame_overrun", 300, 310, target="rta", value=0.5)]}),
    "RL2.W2.13": ("RTA output lost",
                  {"faults": [fault("signal_dropout", 300, 320, target="W2")]}),
    "RL2.W2.14": ("RTA solver fails",
                  {"faults": [fault("component_fault", 300, 310, target="rta_solver")]}),
    "RL2.W2.15": ("RTA switched off while the rejoin point lies below the fence floor",
                  {"duration_frames": 2500,
                   "constraints": {"geofence": {"rectangle": [-5000.0, 60000.0, -10000.0, 10000.0], "floor": 2700.0}},
                   "wingman": {"position": [-600.0, 300.0, -3000.0]},
                   "goal": {"rejoin_point": [-600.0, 300.0, 600.0]},
                   "pilot": {"manual_goal": {"rejoin_point": [-600.0, 300.0, 0.0]}},
                   "test_card": [{"frame": 0, "action": "rta_off"}, {"frame": 2400, "action": "rta_on"}]}),
    "RL2.W2.16": ("recorder drops RTA frames",
                  {"faults": [fault("recorder_fault", 300, 310, target="W2")]}),

    "RL2.W3.1": ("selector fault",
                 {"faults": [fault("component_fault", 300, 310, target="cs")]}),
    "RL2.W3.2": ("applied command corrupted at the airframe",
                 {"faults": [fault("field_corruption", 300, 310, target="W3", value=0.2)]}),
    "RL2.W3.4": ("pilot flies a turn beyond the protected envelope",
                 {"test_card": [{"frame": 200, "action": "takeover"},
                                {"frame": 300, "action": "maneuver", "cmd": [0.6, 0.0, 0.0], "duration": 100}]}),
    "RL2.W3.5": ("common-mode RTA output drives a hard turn",
                 {"faults": [fault("component_fault", 300, 500, target="rta", output=[0.3, 0.0, 0.0])]}),
    "RL2.W3.6": ("RTA output lost at the selector",
                 {"faults": [fault("signal_dropout", 300, 320, target="W2")]}),
    "RL2.W3.7": ("selector clock skew",
                 {"faults": [fault("clock_skew", 300, 400, target="cs", value=3)]}),
    "RL2.W3.8": ("selector output lost before the airframe",
                 {"faults": [fault("signal_dropout", 300, 310, target="W3")]}),
    "RL2.W3.9": ("recorder drops selector frames",
                 {"faults": [fault("recorder_fault", 300, 310, target="W3")]}),

    "RL2.W4.1": ("own-state east position biased 300 m",
                 {"duration_frames": 2000,
                  "faults": [fault("sensor_bias", 0, 2000, field="position.east", value=300.0)]}),
    "RL2.W4.2": ("airframe state lost",
                 {"faults": [fault("signal_dropout", 300, 320, target="W4")]}),
    "RL2.W4.3": ("airframe clock skew",
                 {"faults": [fault("clock_skew", 300, 400, target="airframe", value=3)]}),

    "RL2.W5.1": ("safety pilot impaired before the test",
                 {"faults": [fault("pilot_impairment", 0, 800)]}),
    "RL2.W5.2": ("rejoin point ahead of the pilot's view",
                 {"goal": {"rejoin_point": [300.0, 300.0, 0.0]}}),
    "RL2.W5.3": ("pilot output lost while flying",
                 {"test_card": [{"frame": 200, "action": "takeover"}],
                  "faults": [fault("signal_dropout", 400, 410, target="W5")]}),
    "RL2.W5.4": ("pilot distracted for 30 s",
                 {"faults": [fault("pilot_distraction", 300, 600)]}),
    "RL2.W5.5": ("rejoin point close enough that the RTA intervenes",
                 {"goal": {"rejoin_point": [-100.0, 100.0, 0.0]}}),
    "RL2.W6.1": ("sustained turn at the protected roll limit with noisy sensing",
                 {"constraints": {"envelope": {"max_roll": 0.3}},
                  "plant": {"sensor": [{"field": "roll", "noise_std": 0.009}]},
                  "test_card": [{"frame": 100, "action": "rejoin_point", "point": [-150.0, 1500.0, 0.0]}]}),
    "RL2.W6.2": ("EPM fault",
                 {"faults": [fault("component_fault", 300, 310, target="epm")]}),
    "RL2.W6.3": ("sustained turn at the protected roll limit without hysteresis",
                 {"constraints": {"envelope": {"max_roll": 0.3}},
                  "plant": {"sensor": [{"field": "roll", "noise_std": 0.009}]},
                  "test_card": [{"frame": 100, "action": "rejoin_point", "point": [-150.0, 1500.0, 0.0]}]}),
    "RL2.W6.4": ("EPM fault not reported",
                 {"faults": [fault("component_fault", 300, 310, target="epm")]}),
    "RL2.W8.1": ("EPM status corrupted",
                 {"faults": [fault("field_corruption", 300, 310, target="W8")]}),
    "RL2.W8.2": ("EPM status lost",
                 {"faults": [fault("signal_dropout", 300, 310, target="W8")]}),
}

for rid, (field, scalar, value) in INCORRECT.items():
    SCENARIOS[rid] = (f"lead reports a wrong {field.replace('_', ' ')}",
                      {"faults": [fault("lead_sensor", 300, 310, field=scalar, value=value)]})
for rid, field in MISSING.items():
    SCENARIOS[rid] = (f"{field.replace('_', ' ')} missing from lead reports",
                      {"faults": [fault("field_missing", 300, 310, target="L1.5", field=field)]})


def slug(rid):
    return rid.replace("RL2.", "").replace("RL", "").replace(".", "_").lower()


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "base.json").write_text(json.dumps(BASE, indent=2) + "\n")
    keep = set()
    for rid in sorted(SCENARIOS):
        desc, body = SCENARIOS[rid]
        doc = {"extends": "base.json", "id": "uca_" + slug(rid), "description": desc, "mitigation": rid}
        doc.update(body)
        name = "uca_" + slug(rid) + ".scn"
        keep.add(name)
        (OUT / name).write_text(json.dumps(doc, indent=2) + "\n")
    for p in OUT.glob("*.scn"):
        if p.name not in keep:
            p.unlink()
    print(f"{len(keep)} scenarios in {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()

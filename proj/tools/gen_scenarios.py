#!/usr/bin/env python3
"""Writes the MASCOT scenario event logs and expected.csv.

Each scenario is a tile-replacement mission: mostly low arm speeds, with
spikes towards the end. Heartbeat records are mixed in and dropped by the
mapping. Lengths below count model events, prelude included.
"""

import argparse
import csv
import json
import random
from pathlib import Path

HANDS_ON_LIMIT = 2
AUTONOMOUS_LIMIT = 1
MAX_SPEED = 4


class Mission:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.records = []
        self.events = 1  # system_init comes from the mapping prelude
        self.ts = 0.0
        self.mode = "autonomous"

    def _emit(self, name, fields, model_events=1):
        self.ts += round(self.rng.uniform(0.05, 0.5), 3)
        self.records.append({"name": name, "ts": round(self.ts, 3), "fields": fields})
        self.events += model_events
        if self.rng.random() < 0.15:
            self.ts += 0.01
            self.records.append({"name": "heartbeat", "ts": round(self.ts, 3), "fields": {"seq": len(self.records)}})

    def _speed(self, step):
        # Any value inside the 0.1 m/s band maps to `step`.
        return round((step + self.rng.uniform(0.05, 0.95)) / 10, 4)

    def hands_on(self):
        self._emit("pedal", {"down": True})
        self._emit("modeChange", {"to": "hands_on"})
        self.mode = "hands_on"

    def autonomous(self):
        self._emit("pedal", {"down": False})
        self._emit("modeChange", {"to": "autonomous"})
        self.mode = "autonomous"

    def limit(self):
        return HANDS_ON_LIMIT if self.mode == "hands_on" else AUTONOMOUS_LIMIT

    def readings(self, pairs, late=False):
        for i in range(pairs):
            spike = late and i > pairs // 2 and self.rng.random() < 0.3
            step = self.limit() if spike else self.rng.choice([0, 0, 0, 1] if self.limit() > 1 else [0, 0, 1])
            step = min(step, self.limit())
            self._emit("armSpeed", {"v": self._speed(step)})
            self._emit("speedMonitor", {"verdict": "ok"})

    def unsafe_continue(self):
        """Over-limit speed, then the controller reports it as fine."""
        self._emit("armSpeed", {"v": self._speed(self.limit() + 1)})
        self._emit("speedMonitor", {"verdict": "ok"})

    def unsafe_handled(self):
        self._emit("armSpeed", {"v": self._speed(self.rng.randint(self.limit() + 1, MAX_SPEED))})
        self._emit("speedMonitor", {"verdict": "stop"})
        self._emit("modeChange", {"to": "safe"})

    def emergency_stop(self):
        self._emit("safeStateKey", {"action": "stop"})
        self._emit("modeChange", {"to": "safe"})

    def key_service(self):
        self._emit("safeStateKey", {"action": "removed"})
        self._emit("safeStateKey", {"action": "returned"})

    def reset_restart(self):
        self._emit("system", {"action": "reset"})
        self._emit("system", {"action": "restart"})

    def commissioning(self, arm, on):
        self._emit("commissioningKey", {"arm": arm, "on": on})


def fill(m, total, late=True):
    """Readings up to `total` model events (needs an even gap)."""
    gap = total - m.events
    assert gap >= 0 and gap % 2 == 0, (total, m.events)
    m.readings(gap // 2, late=late)


def s1(m):
    m.hands_on()
    fill(m, 193)


def s2(m):
    m.hands_on()
    fill(m, 83, late=False)
    reject = m.events + 1
    m.unsafe_continue()
    fill(m, 193)
    return reject


def s2a(m):
    m.hands_on()
    fill(m, 91)
    m.unsafe_handled()
    m.reset_restart()
    fill(m, 156)


def s2b(m):
    m.hands_on()
    fill(m, 91)
    m.unsafe_handled()
    m.key_service()
    m.reset_restart()
    fill(m, 158)


def s3(m):
    m.hands_on()
    fill(m, 25, late=False)
    m.autonomous()
    fill(m, 193)


def s4(m):
    m.hands_on()
    fill(m, 23, late=False)
    m.autonomous()
    fill(m, 65, late=False)
    reject = m.events + 1
    m.unsafe_continue()
    fill(m, 193)
    return reject


def s4a(m):
    m.hands_on()
    fill(m, 23, late=False)
    m.autonomous()
    fill(m, 95)
    m.unsafe_handled()
    m.reset_restart()
    fill(m, 200)


def s4b(m):
    m.hands_on()
    fill(m, 23, late=False)
    m.autonomous()
    fill(m, 95)
    m.unsafe_handled()
    m.key_service()
    m.reset_restart()
    fill(m, 204)


def s5(m):
    m.hands_on()
    fill(m, 101)
    m.emergency_stop()
    m.reset_restart()
    fill(m, 201)


def s6(m):
    fill(m, 5, late=False)
    m.commissioning("master", True)
    # Unmonitored movements: above the autonomous limit, still accepted.
    for _ in range(17):
        m._emit("armSpeed", {"v": m._speed(m.rng.randint(0, MAX_SPEED))})
        m._emit("speedMonitor", {"verdict": "ok"})
    m.emergency_stop()
    m.reset_restart()
    fill(m, 46, late=False)


def s7(m):
    fill(m, 3, late=False)
    m.commissioning("slave", True)
    m._emit("modeChange", {"to": "slave_commissioning"})
    m.commissioning("slave", False)
    m.reset_restart()
    fill(m, 10, late=False)


SCENARIOS = [
    ("1", s1, "1;5;6"),
    ("2", s2, "1;5;6"),
    ("2a", s2a, "2"),
    ("2b", s2b, "2"),
    ("3", s3, "1;5;6"),
    ("4", s4, "1;5;6"),
    ("4a", s4a, "2"),
    ("4b", s4b, "2"),
    ("5", s5, "2"),
    ("6", s6, "3"),
    ("7", s7, "4"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "assets/mascot/scenarios"))
    ap.add_argument("--seed", type=int, default=2020)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for n, (sid, build, concepts) in enumerate(SCENARIOS):
        m = Mission(args.seed * 100 + n)
        reject = build(m)
        name = f"scenario_{sid}.jsonl"
        with open(out / name, "w") as f:
            for r in m.records:
                f.write(json.dumps(r, separators=(",", ":")) + "\n")
        rows.append({
            "id": sid,
            "file": name,
            "expected": "rejected" if reject is not None else "accepted",
            "concepts": concepts,
            "length": m.events,
            "reject_index": "" if reject is None else reject,
        })
    with open(out / "expected.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()

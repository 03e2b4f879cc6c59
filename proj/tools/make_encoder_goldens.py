#!/usr/bin/env python3
"""Writes the encoder golden files from tests/golden/encoder/frames.json.

This is an independent reference implementation of the description template.
Decimals use Decimal(repr(x)) with half-up rounding. Scene frames must use a
straight centerline along +x, where the Frenet projection is trivial.
"""

import argparse
import json
import math
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

PHRASES = [
    "{W} in the same direction as the ego vehicle",
    "{W} in the opposite direction of the ego vehicle",
    "{W} towards the ego vehicle's planned trajectory",
    "{W} away from the ego vehicle's planned trajectory",
]


def fixed(x, places):
    q = Decimal(1).scaleb(-places)
    out = Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP)
    if out == 0:
        out = abs(out)
    return f"{out:.{places}f}"


def lon(s):
    if s > 1.0:
        return f"{fixed(s, 1)} meters ahead"
    if s < -1.0:
        return f"{fixed(-s, 1)} meters behind"
    return "parallel with the ego"


def lat(d):
    if d > 1.0:
        return f"{fixed(d, 1)} meters left"
    if d < -1.0:
        return f"{fixed(-d, 1)} meters right"
    return "directly in line with the ego"


def norm(theta):
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def orient_case(o, d, a, b, g):
    if -a <= o <= a:
        return 0
    if o <= -b or o >= b:
        return 1
    if d >= g and -b <= o <= -a:
        return 2
    if d <= -g and a <= o <= b:
        return 2
    return 3


def orient(o, d, v, a, b, g):
    w = "moving" if v >= 0.01 else "facing"
    return PHRASES[orient_case(o, d, a, b, g)].replace("{W}", w)


def block(ident, s, d, theta, width, length, speed, a, b, g):
    o = norm(theta)
    return "\n".join([
        f"ID: {ident}",
        f"Position: ({fixed(s, 1)}, {fixed(d, 1)}) meters ({lon(s)}, {lat(d)})",
        f"Size: Width: {fixed(width, 1)} m, Length: {fixed(length, 1)} m",
        f"Speed: {fixed(speed, 1)} m/s",
        f"Orientation: {fixed(o, 2)} rad ({orient(o, d, speed, a, b, g)})",
    ])


def scene(root, entry, a, b, g):
    doc = json.loads((root / entry["scenario"]).read_text())
    line = doc["centerline"]
    if any(p[1] != 0.0 for p in line) or line[0][0] >= line[-1][0]:
        raise SystemExit(f"{entry['name']}: oracle only handles straight +x centerlines")
    ex, ey = doc["ego_init"][0], doc["ego_init"][1]
    k = round(entry["time"] / 0.1)
    rows = []
    for ag in doc["agents"]:
        st = ag["states"][min(k, len(ag["states"]) - 1)]
        if abs(st[0] - entry["time"]) > 1e-9:
            raise SystemExit(f"{entry['name']}: agent {ag['id']} not sampled at t={entry['time']}")
        _, x, y, th, v = st
        if math.hypot(x - ex, y - ey) > 50.0:
            continue
        rows.append((abs(x - ex), ag["id"], block(ag["id"], x - ex, y, th, ag["width_m"], ag["length_m"], v, a, b, g)))
    rows.sort(key=lambda r: (r[0], r[1]))
    return "".join(("\n" if i else "") + r[2] + "\n" for i, r in enumerate(rows))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--root", type=Path, default=Path(__file__).resolve().parent.parent)
    args = ap.parse_args()
    gold = args.root / "tests" / "golden" / "encoder"
    doc = json.loads((gold / "frames.json").read_text())
    a, b, g = doc["alpha"], doc["beta"], doc["gamma"]
    out = gold / "expected"
    out.mkdir(exist_ok=True)
    for f in doc["frames"]:
        text = block(f["id"], f["s"], f["d"], f["theta"], f["width"], f["length"], f["speed"], a, b, g) + "\n"
        (out / f"{f['name']}.txt").write_text(text)
    for entry in doc["scenes"]:
        (out / f"{entry['name']}.txt").write_text(scene(args.root, entry, a, b, g))
    table = [orient(c["o_norm"], c["d"], c["speed"], a, b, g) for c in doc["orientation"]]
    (out / "orientation.txt").write_text("\n".join(table) + "\n")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Writes the bundled scenario corpus (data/corpus) and critical suite (data/critical).

Agents are described by Frenet motion along the road: a longitudinal
profile s(t) and a lateral profile d(t). Poses and speeds are derived from
the sampled Cartesian track so that files are self-consistent.
"""

import argparse
import json
import math
from pathlib import Path

DT = 0.1
DURATION = 15.0
FORMAT = "dualad-scn-1"


class Road:
    def __init__(self, points):
        self.points = points
        self.s = [0.0]
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            self.s.append(self.s[-1] + math.hypot(x1 - x0, y1 - y0))

    def frame(self, s):
        pts, acc = self.points, self.s
        i = 0
        if s >= acc[-1]:
            i = len(pts) - 2
        else:
            while i < len(pts) - 2 and acc[i + 1] < s:
                i += 1
        (x0, y0), (x1, y1) = pts[i], pts[i + 1]
        seg = acc[i + 1] - acc[i]
        tx, ty = (x1 - x0) / seg, (y1 - y0) / seg
        u = s - acc[i]
        return x0 + u * tx, y0 + u * ty, tx, ty

    def to_cart(self, s, d):
        x, y, tx, ty = self.frame(s)
        return x - d * ty, y + d * tx

    def heading(self, s):
        _, _, tx, ty = self.frame(s)
        return math.atan2(ty, tx)


def straight_road(length=320.0, start=-20.0):
    return Road([(start, 0.0), (start + length, 0.0)])


def curved_road(radius=120.0, straight=40.0, arc_deg=70.0, step_deg=2.0):
    pts = [(-20.0, 0.0), (straight, 0.0)]
    n = int(arc_deg / step_deg)
    for k in range(1, n + 1):
        a = math.radians(k * step_deg)
        pts.append((straight + radius * math.sin(a), radius - radius * math.cos(a)))
    a = math.radians(n * step_deg)
    ex, ey = pts[-1]
    pts.append((ex + 150.0 * math.cos(a), ey + 150.0 * math.sin(a)))
    return Road(pts)


def s_profile(s0, v0, phases=(), v_max=None):
    """Longitudinal position function from piecewise-constant accelerations.

    phases: list of (t_start, accel); speed is kept within [0, v_max]. A
    negative v0 runs against the road direction."""
    fine = 0.005
    n = int(round(DURATION / fine))
    sign = -1.0 if v0 < 0 else 1.0
    s, v = s0, abs(v0)
    table = [s]
    for k in range(n):
        t = k * fine
        a = 0.0
        for ts, acc in phases:
            if t >= ts - 1e-12:
                a = acc
        v_new = max(0.0, v + a * fine)
        if v_max is not None:
            v_new = min(v_new, v_max)
        s += sign * 0.5 * (v + v_new) * fine
        v = v_new
        table.append(s)

    def f(t):
        u = min(max(t / fine, 0.0), float(n))
        i = min(int(u), n - 1)
        w = u - i
        return table[i] + w * (table[i + 1] - table[i])

    return f


def d_profile(d0, d1=None, t1=0.0, t2=1.0, linear=False):
    """Lateral offset moving from d0 to d1 over [t1, t2] (cosine ramp or linear)."""
    if d1 is None:
        return lambda t: d0

    def f(t):
        if t <= t1:
            return d0
        if t >= t2:
            return d1
        u = (t - t1) / (t2 - t1)
        w = u if linear else 0.5 - 0.5 * math.cos(math.pi * u)
        return d0 + (d1 - d0) * w

    return f


KIND_SIZE = {
    "vehicle": (2.0, 4.7),
    "pedestrian": (0.6, 0.6),
    "bicycle": (0.7, 1.8),
    "static_object": (1.0, 1.0),
}


def agent(road, ident, kind, s_fn, d_fn, rest_heading=None, size=None):
    w, l = size or KIND_SIZE[kind]
    n = int(round(DURATION / DT))
    times = [k * DT for k in range(n + 1)]
    pos = [road.to_cart(s_fn(t), d_fn(t)) for t in times]
    h = 1e-3
    states = []
    last_heading = rest_heading
    for t, (x, y) in zip(times, pos):
        ta, tb = max(0.0, t - h), min(DURATION, t + h)
        xa, ya = road.to_cart(s_fn(ta), d_fn(ta))
        xb, yb = road.to_cart(s_fn(tb), d_fn(tb))
        vx, vy = (xb - xa) / (tb - ta), (yb - ya) / (tb - ta)
        v = math.hypot(vx, vy)
        if v > 0.05:
            theta = math.atan2(vy, vx)
            last_heading = theta
        else:
            theta = last_heading if last_heading is not None else road.heading(s_fn(t))
            v = 0.0 if v < 1e-3 else v
        states.append([round(t, 3), round(x, 4), round(y, 4), round(theta, 5), round(v, 4)])
    return {"id": ident, "kind": kind, "width_m": w, "length_m": l, "states": states}


def scenario(ident, road, agents, ego_speed=10.0, speed_limit=15.0, lights=None, ego_s=20.0):
    x, y = road.to_cart(ego_s, 0.0)
    doc = {
        "format": FORMAT,
        "id": ident,
        "centerline": [[round(px, 4), round(py, 4)] for px, py in road.points],
        "speed_limit_mps": speed_limit,
        "ego_init": [round(x, 4), round(y, 4), round(road.heading(ego_s), 6), ego_speed],
        "agents": agents,
        "duration_s": DURATION,
    }
    if lights:
        doc["traffic_lights"] = lights
    return doc


# ---------------------------------------------------------------------------
# Hazard classes


def free_road(ident, road, ego_speed=8.0, speed_limit=15.0):
    return scenario(ident, road, [], ego_speed=ego_speed, speed_limit=speed_limit)


def lead_steady(ident, road, gap=30.0, lead_speed=8.0, ego_speed=10.0):
    lead = agent(road, "lead", "vehicle", s_profile(20.0 + gap, lead_speed), d_profile(0.0))
    return scenario(ident, road, [lead], ego_speed=ego_speed)


def lead_hard_brake(ident, road, gap=18.0, lead_speed=10.0, t_brake=4.0, decel=-8.0, ego_speed=10.0):
    lead = agent(road, "lead", "vehicle", s_profile(20.0 + gap, lead_speed, [(t_brake, decel)]), d_profile(0.0))
    return scenario(ident, road, [lead], ego_speed=ego_speed)


def crossing_pedestrian(ident, road, s_cross=70.0, d_start=-7.0, speed=1.5, t_start=0.0, ego_speed=12.0,
                        direction=1.0):
    dur = 2.0 * abs(d_start) / speed
    ped = agent(road, "ped", "pedestrian", s_profile(s_cross, 0.0),
                d_profile(d_start, -d_start, t_start, t_start + dur, linear=True),
                rest_heading=road.heading(s_cross) + direction * math.pi / 2)
    return scenario(ident, road, [ped], ego_speed=ego_speed)


def oncoming_encroach(ident, road, s_start=150.0, speed=10.0, d_lane=3.5, d_drift=0.3, t1=2.0, t2=5.0,
                      ego_speed=12.0):
    onc = agent(road, "oncoming", "vehicle", s_profile(s_start, -speed), d_profile(d_lane, d_drift, t1, t2))
    return scenario(ident, road, [onc], ego_speed=ego_speed)


def oncoming_overtake(ident, road, s_start=150.0, speed=10.0, d_lane=3.5, d_in=0.0, t_out=2.0, t_back=6.0,
                      ramp=1.5, ego_speed=12.0):
    """Oncoming vehicle borrows the ego lane for a while, then returns."""
    go = d_profile(d_lane, d_in, t_out, t_out + ramp)
    back = d_profile(d_in, d_lane, t_back, t_back + ramp)
    onc = agent(road, "oncoming", "vehicle", s_profile(s_start, -speed), lambda t: go(t) if t < t_back else back(t))
    return scenario(ident, road, [onc], ego_speed=ego_speed)


def merge(ident, road, s_start=45.0, speed=6.0, t1=1.0, t2=4.0, ego_speed=12.0):
    m = agent(road, "merger", "vehicle", s_profile(s_start, speed), d_profile(-3.5, 0.0, t1, t2))
    return scenario(ident, road, [m], ego_speed=ego_speed)


def stopped_traffic(ident, road, s_first=90.0, count=2, ego_speed=12.0):
    agents = [agent(road, f"stopped{i}", "vehicle", s_profile(s_first + 7.0 * i, 0.0), d_profile(0.0))
              for i in range(count)]
    return scenario(ident, road, agents, ego_speed=ego_speed)


def parked_shoulder(ident, road, ego_speed=10.0):
    agents = [agent(road, f"parked{i}", "vehicle", s_profile(50.0 + 25.0 * i, 0.0), d_profile(-3.2))
              for i in range(3)]
    agents.append(agent(road, "cone", "static_object", s_profile(130.0, 0.0), d_profile(-2.4)))
    return scenario(ident, road, agents, ego_speed=ego_speed)


def traffic_light(ident, road, stop_s=80.0, t_green=9.0, ego_speed=10.0, lead=False):
    agents = []
    if lead:
        agents.append(agent(road, "lead", "vehicle", s_profile(45.0, 8.0, [(2.0, -2.0)]), d_profile(0.0)))
    lights = [{"t": 0.0, "stop_line_s": stop_s, "state": "red"},
              {"t": t_green, "stop_line_s": stop_s, "state": "green"}]
    return scenario(ident, road, agents, ego_speed=ego_speed, lights=lights)


def cyclist_ahead(ident, road, s0=40.0, speed=4.0, d=-1.0, ego_speed=10.0):
    bike = agent(road, "bike", "bicycle", s_profile(s0, speed), d_profile(d))
    return scenario(ident, road, [bike], ego_speed=ego_speed)


def busy_street(ident, road, ego_speed=9.0):
    agents = [
        agent(road, "lead", "vehicle", s_profile(50.0, 9.0, [(6.0, -1.5), (9.0, 0.5)]), d_profile(0.0)),
        agent(road, "onc1", "vehicle", s_profile(160.0, -9.0), d_profile(3.5)),
        agent(road, "onc2", "vehicle", s_profile(230.0, -10.0), d_profile(3.5)),
        agent(road, "walker", "pedestrian", s_profile(30.0, 1.2), d_profile(-5.0),
              rest_heading=0.0),
        agent(road, "follower", "vehicle", s_profile(5.0, 9.0), d_profile(0.0)),
    ]
    return scenario(ident, road, agents, ego_speed=ego_speed)


def corpus():
    st = straight_road()
    cv = curved_road()
    docs = [
        free_road("free_road_straight", st),
        free_road("free_road_curve", cv, ego_speed=6.0),
        free_road("free_road_slow_limit", st, ego_speed=5.0, speed_limit=8.0),
        free_road("free_road_standstill", st, ego_speed=0.0),
        lead_steady("lead_steady_far", st, gap=40.0, lead_speed=9.0),
        lead_steady("lead_steady_close", st, gap=15.0, lead_speed=6.0),
        lead_steady("lead_steady_curve", cv, gap=30.0, lead_speed=7.0, ego_speed=8.0),
        lead_hard_brake("lead_brake_early", st, gap=25.0, t_brake=3.0, decel=-6.0),
        lead_hard_brake("lead_brake_late", st, gap=30.0, t_brake=7.0, decel=-5.0),
        lead_hard_brake("lead_brake_gentle", st, gap=30.0, t_brake=4.0, decel=-2.0),
        crossing_pedestrian("ped_cross_far", st, s_cross=120.0, t_start=2.0, ego_speed=10.0),
        crossing_pedestrian("ped_cross_slow", st, s_cross=90.0, speed=1.0, ego_speed=8.0),
        crossing_pedestrian("ped_cross_left", st, s_cross=100.0, d_start=7.0, direction=-1.0, ego_speed=9.0),
        oncoming_encroach("oncoming_mild", st, d_drift=2.2, ego_speed=10.0),
        oncoming_encroach("oncoming_lane_keep", st, d_drift=3.5, ego_speed=12.0),
        oncoming_encroach("oncoming_curve", cv, s_start=170.0, d_drift=2.5, ego_speed=9.0),
        merge("merge_ahead_far", st, s_start=70.0, speed=8.0),
        merge("merge_slow", st, s_start=60.0, speed=5.0, ego_speed=9.0),
        merge("merge_curve", cv, s_start=60.0, speed=7.0, ego_speed=9.0),
        stopped_traffic("stopped_queue", st, s_first=100.0),
        stopped_traffic("stopped_single_near", st, s_first=70.0, count=1, ego_speed=10.0),
        stopped_traffic("stopped_curve", cv, s_first=110.0, count=2, ego_speed=9.0),
        parked_shoulder("parked_shoulder", st),
        parked_shoulder("parked_shoulder_curve", cv, ego_speed=8.0),
        traffic_light("light_red_then_green", st),
        traffic_light("light_with_lead", st, stop_s=90.0, t_green=11.0, lead=True),
        traffic_light("light_green_early", st, stop_s=120.0, t_green=3.0, ego_speed=12.0),
        cyclist_ahead("cyclist_edge", st),
        cyclist_ahead("cyclist_center", st, d=0.0, speed=5.0, ego_speed=9.0),
        busy_street("busy_street", st),
        busy_street("busy_street_curve", cv, ego_speed=7.0),
        lead_steady("lead_faster", st, gap=20.0, lead_speed=13.0, ego_speed=10.0),
    ]
    return docs


def critical():
    st = straight_road()
    return [
        crossing_pedestrian("crit_ped_a", st, s_cross=77.0, speed=1.6, ego_speed=13.0),
        crossing_pedestrian("crit_ped_b", st, s_cross=75.0, speed=1.8, ego_speed=14.0),
        crossing_pedestrian("crit_ped_c", st, s_cross=78.0, d_start=7.0, direction=-1.0, speed=1.6, ego_speed=13.0),
        crossing_pedestrian("crit_ped_d", st, s_cross=98.0, speed=1.5, t_start=1.0, ego_speed=14.0),
        lead_hard_brake("crit_brake_a", st, gap=26.0, lead_speed=12.0, t_brake=2.0, decel=-8.0, ego_speed=10.0),
        lead_hard_brake("crit_brake_b", st, gap=30.0, lead_speed=12.0, t_brake=2.0, decel=-8.0, ego_speed=10.0),
        lead_hard_brake("crit_brake_c", st, gap=30.0, lead_speed=12.0, t_brake=2.0, decel=-6.0, ego_speed=10.0),
        oncoming_overtake("crit_oncoming_a", st, s_start=130.0, speed=12.0, t_out=0.5, t_back=4.0, ego_speed=12.0),
        oncoming_overtake("crit_oncoming_b", st, s_start=150.0, speed=8.0, t_out=0.5, t_back=5.0, ego_speed=12.0),
        oncoming_overtake("crit_oncoming_c", st, s_start=150.0, speed=10.0, t_out=0.5, t_back=5.0, ego_speed=14.0),
    ]


def write(docs, out):
    out.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        (out / f"{doc['id']}.json").write_text(json.dumps(doc, indent=1) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", type=Path, default=Path("data/corpus"))
    ap.add_argument("--critical", type=Path, default=Path("data/critical"))
    args = ap.parse_args()
    write(corpus(), args.corpus)
    write(critical(), args.critical)


if __name__ == "__main__":
    main()

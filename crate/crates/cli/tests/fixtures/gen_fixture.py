#!/usr/bin/env python3
"""Writes the analyze fixture: an uplink/downlink packet log pair and the
heatmap expected from them, computed packet by packet with no shortcuts.

    python3 gen_fixture.py   # rewrites fixture_{ul,dl}.csv and fixture_heatmap.csv
"""

import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
HZ = 30
HORIZON_US = 3_000_000
D_MAX_MS = [30, 40, 50]
CAMERA_RATES_MBPS = [26, 26, 26, 26]
UL_BITS = 65_536
DL_BITS = 33_333


def boundary(k):
    return k * 1_000_000 // HZ


def secs(us):
    return f"{us // 1_000_000}.{us % 1_000_000:06d}"


def make_logs(rng):
    ul, dl = [], []
    n_int = HORIZON_US * HZ // 1_000_000
    for k in range(n_int):
        lo, hi = boundary(k), boundary(k + 1)
        # bursts from idle to about 140 Mbps
        for _ in range(rng.choice([0, 5, 15, 20, 35, 45, 60, 64])):
            sent = rng.randrange(lo, hi)
            delay = None if rng.random() < 0.03 else rng.randrange(2_000, 45_000)
            ul.append((sent, delay))
        # feedback is sometimes missing, late, doubled or lost
        if k < 2 or rng.random() < 0.15:
            continue
        for _ in range(2 if rng.random() < 0.1 else 1):
            sent = rng.randrange(lo, hi)
            delay = None if rng.random() < 0.05 else rng.randrange(1_000, 30_000)
            dl.append((sent, delay))
    ul.sort(key=lambda p: p[0])
    dl.sort(key=lambda p: p[0])
    return ul, dl


def write_log(path, recs, direction, bits):
    with open(path, "w") as f:
        f.write("id,dir,size_bits,t_sent_s,t_delivered_s,link,ntx\n")
        for i, (sent, delay) in enumerate(recs):
            done = "" if delay is None else secs(sent + delay)
            f.write(f"{i},{direction},{bits},{secs(sent)},{done},mmwave:1,1\n")


def constrained_bits(ul, dl, d_max_ms):
    n = HORIZON_US * HZ // 1_000_000
    limit = round(d_max_ms * 1000)
    bits = [0] * n
    for sent, delay in ul:
        k = next((j for j in range(n) if boundary(j) <= sent < boundary(j + 1)), None)
        if k is None or delay is None:
            continue
        lo, hi = boundary(k), boundary(k + 1)
        inside = [p for p in dl if lo <= p[0] < hi]
        before = [p for p in dl if p[0] < lo]
        if inside:
            fb = min(inside, key=lambda p: p[0])
        elif before:
            fb = max(before, key=lambda p: p[0])
        else:
            continue
        if fb[1] is not None and delay + fb[1] <= limit:
            bits[k] += UL_BITS
    return bits


def main():
    rng = random.Random(7)
    ul, dl = make_logs(rng)
    write_log(os.path.join(HERE, "fixture_ul.csv"), ul, "ul", UL_BITS)
    write_log(os.path.join(HERE, "fixture_dl.csv"), dl, "dl", DL_BITS)
    with open(os.path.join(HERE, "fixture_heatmap.csv"), "w") as f:
        f.write("d_max_ms,n_cameras,required_mbps,availability\n")
        for d in D_MAX_MS:
            bits = constrained_bits(ul, dl, d)
            for n in range(1, len(CAMERA_RATES_MBPS) + 1):
                req = sum(CAMERA_RATES_MBPS[:n]) * 1_000_000
                hits = sum(1 for b in bits if b * HZ >= req)
                f.write(f"{d},{n},{req // 1_000_000},{hits / len(bits)!r}\n")


if __name__ == "__main__":
    main()

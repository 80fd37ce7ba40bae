#!/usr/bin/env python3
"""Generates the synthetic skinned hand mesh used by tests and examples.

Each phalanx is an open cylinder from its joint keypoint to the next keypoint;
the palm is a two-sided grid between the wrist and the MCP row. Every vertex
is built for a known link and gets its largest weight on that link, with the
remainder shared with the neighboring links of the chain, so the argmax
labels are known by construction.

Outputs (next to this script):
  fixture_hand.obj          vertices + triangles
  fixture_hand_weights.txt  16 columns per vertex (palm, then joint links)
  fixture_hand_labels.txt   ground-truth link index per vertex
"""
import json
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
FINGERS = ["thumb", "index", "middle", "ring", "pinky"]
LEVELS = {"thumb": ["cmc", "mcp", "ip", "tip"]}
for f in FINGERS[1:]:
    LEVELS[f] = ["mcp", "pip", "dip", "tip"]

RINGS = 4
SIDES = 8
RADIUS = 0.008


def sub(a, b):
    return [a[i] - b[i] for i in range(3)]


def add(a, b):
    return [a[i] + b[i] for i in range(3)]


def scale(a, s):
    return [x * s for x in a]


def cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def norm(a):
    return math.sqrt(sum(x * x for x in a))


def unit(a):
    n = norm(a)
    return [x / n for x in a]


def main():
    with open(os.path.join(HERE, "fixture_skeleton.json")) as fh:
        kp = json.load(fh)["keypoints"]

    rng = random.Random(20240611)
    vertices, faces, weights, labels = [], [], [], []

    def add_vertex(p, link, neighbors):
        main_w = 0.6 + 0.3 * rng.random()
        row = [0.0] * 16
        row[link] = main_w
        rest = 1.0 - main_w
        if neighbors:
            shares = [rng.random() + 0.1 for _ in neighbors]
            total = sum(shares)
            for n, s in zip(neighbors, shares):
                row[n] += rest * s / total
        else:
            row[link] += rest
        row[link] = 1.0 - sum(row[i] for i in range(16) if i != link)
        vertices.append(p)
        weights.append(row)
        labels.append(link)
        return len(vertices) - 1

    # Palm: two parallel sheets (y = +-6 mm) over the region wrist..MCP row.
    nx, nz = 6, 6
    for side, y in ((0, 0.006), (1, -0.006)):
        base = len(vertices)
        for i in range(nx):
            for k in range(nz):
                x = 0.005 + 0.075 * i / (nx - 1)
                z = -0.030 + 0.055 * k / (nz - 1)
                add_vertex([x, y, z], 0, [])
        for i in range(nx - 1):
            for k in range(nz - 1):
                a = base + i * nz + k
                b, c, d = a + nz, a + 1, a + nz + 1
                if side == 0:
                    faces += [[a, b, c], [c, b, d]]
                else:
                    faces += [[a, c, b], [c, d, b]]

    # Phalanges: link index 1 + 3 * finger + level.
    for fi, f in enumerate(FINGERS):
        names = LEVELS[f]
        previous_last_ring = None
        for level in range(3):
            link = 1 + 3 * fi + level
            p0 = kp[f + "_" + names[level]]
            p1 = kp[f + "_" + names[level + 1]]
            d = unit(sub(p1, p0))
            helper = [0.0, 1.0, 0.0] if abs(d[1]) < 0.9 else [1.0, 0.0, 0.0]
            u = unit(cross(d, helper))
            v = cross(d, u)
            neighbors = []
            if level > 0:
                neighbors.append(link - 1)
            else:
                neighbors.append(0)
            if level < 2:
                neighbors.append(link + 1)
            length = norm(sub(p1, p0))
            rings = []
            for r in range(RINGS):
                t = (r + 0.5) / RINGS
                center = add(p0, scale(d, t * length))
                ring = []
                for s in range(SIDES):
                    ang = 2.0 * math.pi * s / SIDES
                    off = add(scale(u, RADIUS * math.cos(ang)), scale(v, RADIUS * math.sin(ang)))
                    ring.append(add_vertex(add(center, off), link, neighbors))
                rings.append(ring)

            def bridge(ra, rb):
                for s in range(SIDES):
                    a, b = ra[s], ra[(s + 1) % SIDES]
                    c, e = rb[s], rb[(s + 1) % SIDES]
                    faces.append([a, c, b])
                    faces.append([b, c, e])

            for r in range(RINGS - 1):
                bridge(rings[r], rings[r + 1])
            # Faces spanning two links (majority rule exercised here).
            if previous_last_ring is not None:
                bridge(previous_last_ring, rings[0])
            previous_last_ring = rings[-1]

    with open(os.path.join(HERE, "fixture_hand.obj"), "w") as fh:
        fh.write("# synthetic cylinder-finger hand, generated by generate_fixture_mesh.py\n")
        for p in vertices:
            fh.write("v %.9f %.9f %.9f\n" % tuple(p))
        for a, b, c in faces:
            fh.write("f %d %d %d\n" % (a + 1, b + 1, c + 1))
    with open(os.path.join(HERE, "fixture_hand_weights.txt"), "w") as fh:
        for row in weights:
            fh.write(" ".join("%.17g" % w for w in row) + "\n")
    with open(os.path.join(HERE, "fixture_hand_labels.txt"), "w") as fh:
        for l in labels:
            fh.write("%d\n" % l)
    print("vertices", len(vertices), "faces", len(faces))


if __name__ == "__main__":
    main()

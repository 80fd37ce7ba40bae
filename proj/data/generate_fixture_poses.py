#!/usr/bin/env python3
"""Generates the 100-frame pose fixture from the fixture model description.

Even frames lie on the model's constraint manifold: angles are drawn inside
the joint limits and composed with scipy. Odd frames add a random rotation
of up to 20 degrees per joint. The generating angles of every frame are
written next to the poses.

usage: generate_fixture_poses.py model.json
Outputs (next to this script):
  fixture_poses.json        [[15 x [x, y, z]] x 100] axis-angle, model joint order
  fixture_poses_truth.csv   frame, on_manifold, then the 20 generating angles
"""
import json
import os
import sys

import numpy as np
from scipy.spatial.transform import Rotation as R

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    model = json.load(open(sys.argv[1]))
    rng = np.random.default_rng(7)
    frames, truth = [], []
    for i in range(100):
        on_manifold = i % 2 == 0
        angles, frame = [], []
        for j in model["joints"]:
            if j["type"] == "two":
                lo1, hi1 = j["abduction_limits"]
                lo2, hi2 = j["flexion_limits"]
                phi = rng.uniform(0.9 * lo1, 0.9 * hi1)
                theta = rng.uniform(0.9 * lo2, 0.9 * hi2)
                rot = R.from_rotvec(phi * np.array(j["abduction_axis"])) * R.from_rotvec(
                    theta * np.array(j["flexion_axis"]))
                angles += [phi, theta]
            else:
                lo, hi = j["limits"]
                t = rng.uniform(0.9 * lo, 0.9 * hi)
                rot = R.from_rotvec(t * np.array(j["axis"]))
                angles.append(t)
            if not on_manifold:
                axis = rng.normal(size=3)
                axis /= np.linalg.norm(axis)
                rot = rot * R.from_rotvec(np.deg2rad(rng.uniform(0, 20)) * axis)
            frame.append([float(x) for x in rot.as_rotvec()])
        frames.append(frame)
        truth.append((i, int(on_manifold), angles))

    with open(os.path.join(HERE, "fixture_poses.json"), "w") as fh:
        fh.write("[\n")
        for k, f in enumerate(frames):
            fh.write("  [" + ", ".join("[%.17g, %.17g, %.17g]" % tuple(v) for v in f) + "]")
            fh.write(",\n" if k + 1 < len(frames) else "\n")
        fh.write("]\n")
    with open(os.path.join(HERE, "fixture_poses_truth.csv"), "w") as fh:
        fh.write("frame,on_manifold," + ",".join(model["dof_layout"]) + "\n")
        for i, on, a in truth:
            fh.write("%d,%d," % (i, on) + ",".join("%.17g" % x for x in a) + "\n")


if __name__ == "__main__":
    main()

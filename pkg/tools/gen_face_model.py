#!/usr/bin/env python3
"""Generate the bundled 68-point mean-face geometry.

Axis conventions: u grows toward the viewer's right, v grows downward
(matching image axes for a frontal face at identity rotation), w grows into
the head. Source proportions are hand-laid-out anthropometric averages in
millimetres, scaled to model units (1 unit = 100 mm) and re-centered so the
centroid of all 68 points is the origin.

Landmark numbering follows the common 68-point convention: 1-17 jaw contour,
18-27 brows, 28-36 nose, 37-48 eyes, 49-68 mouth.

Usage: python tools/gen_face_model.py > src/dualpose/data/standard_face_68.json
"""

import json
import sys

import numpy as np


def build_points_mm() -> np.ndarray:
    pts = np.zeros((68, 3))

    # jaw contour 1-17: half-ellipse from the viewer-left ear to the viewer-right ear
    theta = np.linspace(-np.pi / 2, np.pi / 2, 17)
    pts[0:17, 0] = 68.0 * np.sin(theta)
    pts[0:17, 1] = -10.0 + 88.0 * np.cos(theta)
    pts[0:17, 2] = 52.0 * (1.0 - np.cos(theta))

    # brows 18-27 (left then right), gentle arch, slightly proud of the eyes
    brow_x = np.array([-54.0, -44.0, -33.0, -22.0, -12.0])
    brow_y = np.array([-36.0, -41.0, -43.0, -41.0, -37.0])
    brow_z = np.array([0.0, -3.0, -4.0, -3.0, -1.0])
    pts[17:22] = np.column_stack([brow_x, brow_y, brow_z])
    pts[22:27] = np.column_stack([-brow_x[::-1], brow_y[::-1], brow_z[::-1]])

    # nose bridge 28-31 descending to the protruding tip
    pts[27:31] = [[0.0, -24.0, -4.0], [0.0, -14.0, -9.0],
                  [0.0, -4.0, -15.0], [0.0, 6.0, -21.0]]
    # nose base 32-36
    pts[31:36] = [[-14.0, 14.0, -8.0], [-7.0, 16.0, -11.0], [0.0, 17.0, -13.0],
                  [7.0, 16.0, -11.0], [14.0, 14.0, -8.0]]

    # left eye 37-42 (outer corner, upper lid x2, inner corner, lower lid x2)
    pts[36:42] = [[-44.0, -18.0, 7.0], [-37.0, -22.0, 5.0], [-28.0, -22.0, 5.0],
                  [-21.0, -17.0, 7.0], [-28.0, -13.0, 5.0], [-37.0, -13.0, 5.0]]
    # right eye 43-48 (inner corner first)
    pts[42:48] = [[21.0, -17.0, 7.0], [28.0, -22.0, 5.0], [37.0, -22.0, 5.0],
                  [44.0, -18.0, 7.0], [37.0, -13.0, 5.0], [28.0, -13.0, 5.0]]

    # outer lip 49-60
    pts[48:60] = [[-27.0, 42.0, -2.0], [-18.0, 35.0, -4.0], [-7.0, 31.0, -6.0],
                  [0.0, 30.0, -7.0], [7.0, 31.0, -6.0], [18.0, 35.0, -4.0],
                  [27.0, 42.0, -2.0], [18.0, 49.0, -4.0], [7.0, 53.0, -6.0],
                  [0.0, 54.0, -6.5], [-7.0, 53.0, -6.0], [-18.0, 49.0, -4.0]]
    # inner lip 61-68
    pts[60:68] = [[-22.0, 42.0, -3.0], [-7.0, 39.0, -5.0], [0.0, 38.0, -5.5],
                  [7.0, 39.0, -5.0], [22.0, 42.0, -3.0], [7.0, 45.0, -5.0],
                  [0.0, 46.0, -5.5], [-7.0, 45.0, -5.0]]
    return pts


def main() -> None:
    pts = build_points_mm() / 100.0  # model units
    pts -= pts.mean(axis=0)
    doc = {
        "name": "dualpose-mean-face",
        "version": "1",
        "points": [[float(u), float(v), float(w)] for u, v, w in pts],
    }
    json.dump(doc, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()

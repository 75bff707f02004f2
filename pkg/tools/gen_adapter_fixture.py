#!/usr/bin/env python3
"""Generate the landmark-adapter test fixtures.

Renders synthetic face images as binary PPMs: a shaded face (ellipse, eyes,
mouth) drawn from the canonical model's projected landmarks, with each
landmark additionally marked by a 3x3 fiducial dot colored (255, 0, index).
The adapter's `marker` backend recovers the landmark positions from those
dots. Writes:

  landmark-adapter/fixtures/face_frontal.ppm     one frontal face
  landmark-adapter/fixtures/blank.ppm            no face at all
  landmark-adapter/fixtures/clip01/frame00[0-9].ppm   10-frame clip, drifting pose

Usage: python tools/gen_adapter_fixture.py
"""

from pathlib import Path

import numpy as np

from dualpose.face_model import default_model
from dualpose.features import default_intrinsics
from dualpose.geometry import Pose, project, rodrigues_to_matrix

SIZE = 256
FIXTURES = Path(__file__).resolve().parent.parent / "landmark-adapter" / "fixtures"

BACKGROUND = (210, 215, 220)
SKIN = (205, 170, 140)
FEATURE = (90, 60, 50)


def blank_canvas():
    img = np.empty((SIZE, SIZE, 3), dtype=np.uint8)
    img[:, :] = BACKGROUND
    return img


def fill_ellipse(img, cx, cy, rx, ry, color):
    ys, xs = np.ogrid[:SIZE, :SIZE]
    mask = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0
    img[mask] = color


def draw_face(img, pts):
    jaw = pts[0:17]
    cx, cy = pts[:, 0].mean(), pts[:, 1].mean()
    rx = (jaw[:, 0].max() - jaw[:, 0].min()) / 2 + 8
    ry = (jaw[:, 1].max() - pts[17:27, 1].min()) / 2 + 14
    fill_ellipse(img, cx, cy - 6, rx, ry, SKIN)
    for eye in (pts[36:42], pts[42:48]):
        fill_ellipse(img, eye[:, 0].mean(), eye[:, 1].mean(), 7, 4, FEATURE)
    mouth = pts[48:60]
    fill_ellipse(img, mouth[:, 0].mean(), mouth[:, 1].mean(), 13, 5, (150, 80, 80))


def draw_markers(img, pts):
    for idx, (x, y) in enumerate(pts, start=1):
        px, py = int(round(x)), int(round(y))
        img[max(py - 1, 0):py + 2, max(px - 1, 0):px + 2] = (255, 0, idx)


def write_ppm(path, img):
    header = f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + img.tobytes())


def render(rvec, tvec, model, cam):
    pts = project(model.points, Pose(rodrigues_to_matrix(rvec), tvec), cam)
    if (pts.min() < 4) or (pts.max() > SIZE - 4):
        raise ValueError("pose pushes landmarks too close to the border")
    img = blank_canvas()
    draw_face(img, pts)
    draw_markers(img, pts)
    return img


def main() -> None:
    model = default_model()
    cam = default_intrinsics(SIZE, SIZE)

    write_ppm(FIXTURES / "face_frontal.ppm",
              render(np.array([0.05, -0.08, 0.02]), np.array([0.02, -0.05, 2.1]),
                     model, cam))
    write_ppm(FIXTURES / "blank.ppm", blank_canvas())

    for f in range(10):
        rvec = np.array([0.03, -0.20 + 0.04 * f, 0.01])
        tvec = np.array([0.01 * f - 0.04, 0.0, 2.15])
        write_ppm(FIXTURES / "clip01" / f"frame{f:03d}.ppm",
                  render(rvec, tvec, model, cam))
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()

"""Regenerate the committed tensor-path fixtures.

Builds a textured synthetic image pair with a known smooth deformation
and hand-constructed 3-scale feature stacks (block statistics pooled to
28/14/7 grids), so the tensor feature path can be exercised without any
external activation export.

Run from the repository root:
    python tests/fixtures/generate_fixtures.py
"""

import os

import numpy as np

from mmreg import _kernels
from mmreg.features import FeatureMap, FeatureStack
from mmreg.fmap import write_feature_stack
from mmreg.imaging import save_image
from mmreg.synth import synth_pair
from mmreg.transform import apply_tps

HERE = os.path.dirname(os.path.abspath(__file__))
SIZE = 224


def _smooth_noise(rng, size, passes=6, radius=4):
    field = rng.random((size, size))
    kernel = np.ones(2 * radius + 1) / (2 * radius + 1)
    for _ in range(passes):
        field = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="same"), 0, field)
        field = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="same"), 1, field)
    field -= field.min()
    return field / field.max()


def textured_pair():
    # blob from the synth generator over a smoothed random field, so
    # every block is locally distinctive; the moving image is the fixed
    # image resampled through the same ground-truth deformation
    fixed_bin, _, truth = synth_pair(seed=11, deform_px=8.0, size=SIZE)
    texture = _smooth_noise(np.random.default_rng(1234), SIZE)
    fixed = np.clip(0.5 * fixed_bin + 160.0 * texture, 0, 255).astype(np.uint8)

    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    src = apply_tps(truth, pts)
    vals = _kernels.bilinear_sample(
        fixed.astype(np.float64),
        np.ascontiguousarray(src[:, 0]),
        np.ascontiguousarray(src[:, 1]),
        False,
        0.0,
    )
    moving = np.floor(vals + 0.5).astype(np.uint8).reshape(SIZE, SIZE)
    return fixed, moving


def _box_smooth(img, radius, passes=2):
    kernel = np.ones(2 * radius + 1) / (2 * radius + 1)
    out = img.astype(np.float64)
    for _ in range(passes):
        out = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="same"), 0, out)
        out = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="same"), 1, out)
    return out


def field_feature_stack(gray: np.ndarray) -> FeatureStack:
    # channels are multi-scale smoothed fields and their gradients,
    # sampled on a small offset pattern around each cell center; smooth
    # fields tolerate few-pixel deformations while staying distinctive
    fields = []
    for radius in (3, 6, 10):
        f = _box_smooth(gray, radius)
        gy, gx = np.gradient(f)
        fields += [f, gx, gy]
    fields.append(fields[0] - fields[3])
    fields.append(fields[3] - fields[6])
    offsets = [(0, 0), (-3, -3), (3, -3), (-3, 3), (3, 3)]
    maps = []
    for sid, grid in enumerate((28, 14, 7)):
        cell = SIZE // grid
        cx = (np.arange(grid) + 0.5) * cell  # integer-valued for 224/28, /14, /7
        xs, ys = np.meshgrid(cx.astype(int), cx.astype(int))
        chans = []
        for f in fields:
            for dx, dy in offsets:
                px = np.clip(xs + dx, 0, SIZE - 1)
                py = np.clip(ys + dy, 0, SIZE - 1)
                chans.append(f[py, px])
        vals = np.stack(chans).astype(np.float32)
        maps.append(FeatureMap(scale_id=sid, values=vals))
    return FeatureStack(source_w=SIZE, source_h=SIZE, maps=tuple(maps))


def main():
    fixed, moving = textured_pair()
    save_image(fixed, os.path.join(HERE, "tensor_fixed.png"))
    save_image(moving, os.path.join(HERE, "tensor_moving.png"))
    write_feature_stack(field_feature_stack(fixed), os.path.join(HERE, "tensor_fixed.fmap"))
    write_feature_stack(field_feature_stack(moving), os.path.join(HERE, "tensor_moving.fmap"))
    print("fixtures written to", HERE)


if __name__ == "__main__":
    main()

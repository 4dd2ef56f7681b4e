"""Acceptance suite: one test per exit criterion, each printing a
pass/fail line. Run with `pytest tests/test_acceptance.py -v -s`."""

import itertools
import os
import time

import numpy as np
import pytest

from test_correspondence import sc_oracle
from test_imaging import otsu_oracle
from test_metrics import ssim_oracle

from mmreg import _kernels
from mmreg.cli import main as cli_main
from mmreg.correspondence import normalize_points, radial_edges, shape_context, solve_assignment
from mmreg.imaging import otsu_threshold
from mmreg.metrics import aaid, rmse, ssim
from mmreg.pipeline import PipelineConfig, evaluate_recovery, run_registration
from mmreg.synth import synth_pair
from mmreg.transform import apply_similarity, apply_tps, fit_similarity, fit_tps

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_assignment_oracle():
    rng = np.random.default_rng(42)
    t0 = time.perf_counter()
    exact = 0
    trials = 200
    for _ in range(trials):
        n = int(rng.integers(2, 8))
        c = rng.random((n, n))
        assign = solve_assignment(c)
        got = float(c[np.arange(n), assign].sum())
        perms = np.array(list(itertools.permutations(range(n))))
        best = float(c[np.arange(n), perms].sum(axis=1).min())
        if got == best:
            exact += 1
    elapsed = time.perf_counter() - t0
    _report(
        "assignment-oracle",
        exact == trials and elapsed < 10.0,
        f"{exact}/{trials} exact matches to brute force in {elapsed:.2f}s (limit 10s)",
    )


def test_tps_interpolation_and_bending():
    rng = np.random.default_rng(43)
    t0 = time.perf_counter()
    worst_interp = 0.0
    worst_weight = 0.0
    for _ in range(100):
        n = int(rng.integers(4, 21))
        src = rng.uniform(0, 224, (n, 2))
        dst = rng.uniform(0, 224, (n, 2))
        model = fit_tps(src, dst, 0.0)
        worst_interp = max(worst_interp, float(np.abs(apply_tps(model, src) - dst).max()))
        a = rng.uniform(-2, 2, (2, 2))
        t = rng.uniform(-50, 50, 2)
        affine_model = fit_tps(src, src @ a.T + t, 0.0)
        worst_weight = max(worst_weight, float(np.abs(affine_model.radial_weights).max()))
    elapsed = time.perf_counter() - t0
    _report(
        "tps-interpolation",
        worst_interp < 1e-6 and worst_weight < 1e-8 and elapsed < 5.0,
        f"max interp residual {worst_interp:.2e} (<1e-6), max affine bending weight "
        f"{worst_weight:.2e} (<1e-8) in {elapsed:.2f}s (limit 5s)",
    )


def test_similarity_recovery():
    rng = np.random.default_rng(44)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 20))
        src = rng.uniform(0, 100, (n, 2))
        s = float(rng.uniform(0.5, 2.0))
        theta = float(rng.uniform(0, 2 * np.pi))
        t = rng.uniform(-50, 50, 2)
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        dst = s * src @ rot.T + t
        m = fit_similarity(src, dst)
        dtheta = abs((m.rotation - theta + np.pi) % (2 * np.pi) - np.pi)
        worst = max(
            worst,
            abs(m.scale - s),
            dtheta,
            float(np.abs(m.translation - t).max()),
        )
    elapsed = time.perf_counter() - t0
    _report(
        "similarity-recovery",
        worst < 1e-9 and elapsed < 2.0,
        f"max parameter error {worst:.2e} (<1e-9) in {elapsed:.2f}s (limit 2s)",
    )


def test_shape_context_properties():
    rng = np.random.default_rng(45)
    edges = radial_edges(5, 0.125, 2.0)
    counting_ok = True
    for _ in range(50):
        n = int(rng.integers(2, 40))
        pts, _ = normalize_points(rng.uniform(0, 100, (n, 2)))
        counts = _kernels.sc_bin_counts(pts, edges, 12)
        counting_ok &= bool((counts.sum(axis=1) == n - 1).all())

    invariance_ok = True
    for _ in range(20):
        n = int(rng.integers(4, 25))
        pts = rng.integers(0, 4096, (n, 2)).astype(np.float64) / 8.0
        if len(np.unique(pts, axis=0)) < 2:
            continue
        base = shape_context(normalize_points(pts)[0])
        shifted = shape_context(normalize_points(pts + np.array([37.0, -11.0]))[0])
        scaled = shape_context(normalize_points(pts * 4.0)[0])
        invariance_ok &= np.array_equal(base, shifted) and np.array_equal(base, scaled)

    oracle_ok = True
    for _ in range(20):
        n = int(rng.integers(3, 30))
        pts, _ = normalize_points(rng.uniform(-5, 5, (n, 2)))
        desc = shape_context(pts, n_r=5, n_theta=12, r_min=0.125, r_max=2.0)
        oracle_ok &= np.array_equal(desc, sc_oracle(pts.tolist(), 5, 12, 0.125, 2.0))

    _report(
        "shape-context",
        counting_ok and invariance_ok and oracle_ok,
        f"counting identity {counting_ok}, translation/scale bin-identical "
        f"{invariance_ok}, brute-force oracle exact {oracle_ok}",
    )


def test_metric_identities_and_oracle():
    rng = np.random.default_rng(46)
    img = rng.integers(0, 256, (64, 64)).astype(np.uint8)
    identity_ok = (
        rmse(img, img) == 0.0
        and aaid(img, img) == 0.0
        and abs(ssim(img, img) - 1.0) < 1e-9
    )
    order_ok = True
    for _ in range(100):
        a = rng.integers(0, 256, (16, 16)).astype(np.uint8)
        b = rng.integers(0, 256, (16, 16)).astype(np.uint8)
        order_ok &= rmse(a, b) >= aaid(a, b)
    worst = 0.0
    for _ in range(20):
        a = rng.integers(0, 256, (64, 64)).astype(np.uint8)
        b = rng.integers(0, 256, (64, 64)).astype(np.uint8)
        worst = max(worst, abs(ssim(a, b) - ssim_oracle(a, b)))
    _report(
        "metrics",
        identity_ok and order_ok and worst < 1e-6,
        f"identities at 1e-9 {identity_ok}, rmse>=aaid on 100 pairs {order_ok}, "
        f"ssim vs naive oracle max diff {worst:.2e} (<1e-6)",
    )


def test_otsu_bruteforce():
    rng = np.random.default_rng(47)
    checked = 0
    agreements = 0
    while checked < 100:
        h, w = rng.integers(4, 24, 2)
        img = rng.integers(0, 256, (h, w)).astype(np.uint8)
        if img.min() == img.max():
            continue
        checked += 1
        if otsu_threshold(img) == otsu_oracle(img):
            agreements += 1
    _report("otsu-bruteforce", agreements == 100, f"{agreements}/100 thresholds equal exhaustive search")


@pytest.fixture(scope="module")
def recovery_benches(tmp_path_factory):
    seeds = list(range(20))
    base = tmp_path_factory.mktemp("recovery")
    t0 = time.perf_counter()
    tps = evaluate_recovery(seeds, 10.0, {"min_component_area": 5}, str(base / "tps"))
    tps_elapsed = time.perf_counter() - t0
    sim = evaluate_recovery(
        seeds, 10.0, {"min_component_area": 5, "transform": "similarity"}, str(base / "sim")
    )
    return tps, sim, tps_elapsed


def test_end_to_end_synthetic_recovery(recovery_benches):
    tps, _, elapsed = recovery_benches
    frac = tps["improvement_fraction"]
    median_ssim = tps["median_post_ssim"]
    _report(
        "synthetic-recovery",
        frac >= 0.9 and median_ssim >= 0.8 and elapsed < 120.0,
        f"improved {frac:.0%} of 20 (>=90%), median post-ssim {median_ssim:.3f} "
        f"(>=0.8) in {elapsed:.1f}s (limit 120s)",
    )


def test_tps_beats_similarity(recovery_benches):
    tps, sim, _ = recovery_benches
    wins = sum(
        1
        for a, b in zip(tps["rows"], sim["rows"])
        if a["post"]["ssim"] >= b["post"]["ssim"]
    )
    _report(
        "tps-vs-similarity",
        wins >= 14,
        f"tps post-ssim >= similarity post-ssim in {wins}/20 instances (need >=14)",
    )


def test_register_determinism(tmp_path):
    pair_dir = str(tmp_path / "pair")
    out_dir = str(tmp_path / "out")
    assert cli_main(["synth", "--seed", "5", "--deform", "10", "--out", pair_dir]) == 0
    args = [
        "register", "--fixed", f"{pair_dir}/fixed.png", "--moving", f"{pair_dir}/moving.png",
        "--min-area", "5", "--seed", "5", "--out", out_dir,
    ]
    assert cli_main(args) == 0
    first = {
        name: open(os.path.join(out_dir, name), "rb").read()
        for name in ("report.json", "warped.png", "overlay.png")
    }
    assert cli_main(args) == 0
    second = {
        name: open(os.path.join(out_dir, name), "rb").read()
        for name in ("report.json", "warped.png", "overlay.png")
    }
    same = first == second
    _report("determinism", same, "two register runs produced byte-identical report and images")


def test_fmap_fixture_drives_tensor_path(tmp_path):
    cfg = PipelineConfig(
        fixed_path=os.path.join(FIXTURES, "tensor_fixed.png"),
        moving_path=os.path.join(FIXTURES, "tensor_moving.png"),
        feature_source="tensor",
        tensor_fixed=os.path.join(FIXTURES, "tensor_fixed.fmap"),
        tensor_moving=os.path.join(FIXTURES, "tensor_moving.fmap"),
        binarize="none",
        out_dir=str(tmp_path / "out"),
    )
    report = run_registration(cfg)
    scales = report.stages["features_per_scale"]["moving"]
    ok = (
        len(scales) == 3
        and report.stages["inliers"] >= 3
        and os.path.exists(report.outputs["report"])
        and report.transform["kind"] == "tps"
    )
    _report(
        "fmap-tensor-path",
        ok,
        f"3-scale committed fixture ran end to end with {report.stages['inliers']} inliers",
    )

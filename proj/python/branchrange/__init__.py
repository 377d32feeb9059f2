"""Stereo ranging toolkit: disparity, depth and branch distance estimation."""

from __future__ import annotations

import json

import numpy as np

from ._core import (
    BranchrangeError,
    CameraRig,
    CostMetric,
    MadSplit,
    MatchParams,
    RangeEstimate,
    RangerParams,
    WlsParams,
    block_match,
    census_transform,
    clamped_mean,
    depth_map_from_disparity,
    depth_to_disparity,
    disparity_to_depth,
    estimate_distance,
    fill_holes,
    mad_filter,
    mask_from_polygon_json,
    rasterize_polygons,
    read_pfm,
    read_png,
    run_cli,
    sample_contour,
    sgbm,
    wls_refine,
    write_pfm,
    write_png,
)
from . import _core

__all__ = [
    "BranchrangeError",
    "CameraRig",
    "CostMetric",
    "MadSplit",
    "MatchParams",
    "RangeEstimate",
    "RangerParams",
    "WlsParams",
    "block_match",
    "census_transform",
    "clamped_mean",
    "compute_depth",
    "default_config",
    "depth_map_from_disparity",
    "depth_to_disparity",
    "disparity_to_depth",
    "estimate_distance",
    "fill_holes",
    "generate_scene",
    "mad_filter",
    "mask_from_polygon_json",
    "protocol_scene_specs",
    "rasterize_polygons",
    "read_pfm",
    "read_png",
    "run_cli",
    "sample_contour",
    "sgbm",
    "wls_refine",
    "write_pfm",
    "write_png",
]


def default_config() -> dict:
    """Effective default run configuration."""
    return json.loads(_core._default_config())


def compute_depth(left: np.ndarray, right: np.ndarray, config: dict | None = None) -> tuple[np.ndarray, np.ndarray]:
    """sgbm, optional WLS refinement and triangulation. Returns (disparity, depth)."""
    return _core._compute_depth(left, right, json.dumps(config) if config else "")


def generate_scene(spec: dict) -> dict:
    """Renders a synthetic scene. Arrays are (height, width); 'spec' is the resolved spec."""
    bundle = _core._generate_scene(json.dumps(spec))
    bundle["spec"] = json.loads(bundle["spec"])
    return bundle


def protocol_scene_specs(seed: int, rig: CameraRig | None = None, d_max: int = 64) -> list[dict]:
    """Specs of the 1.0 / 1.5 / 2.0 m single-branch scenes."""
    return [json.loads(s) for s in _core._protocol_specs(rig or CameraRig(), seed, d_max)]

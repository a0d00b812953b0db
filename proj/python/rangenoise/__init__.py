"""Range-camera noise toolkit.

Planar-scene synthesis, lateral/axial noise estimation from frame stacks,
degree-2 polynomial noise models sigma(z, theta) with device presets, and
calibrated noise emulation for synthetic training data.
"""

from rangenoise._core import (
    CameraIntrinsics,
    EstimationError,
    FitError,
    FormatError,
    NoiseModel,
    NoiseSample,
    PlaneSceneSpec,
    RangeImage,
    SigmaValue,
    __version__,
    average_frames,
    axial_noise_field,
    compute_normals,
    emulate_noise,
    estimate_axial,
    estimate_lateral,
    extract_edge_pixels,
    fit_line_odr,
    fit_polynomial,
    format_sigma,
    ks_normality,
    ks_threshold_5pct,
    lateral_jitter_scale,
    lowpass_reference,
    mm_to_px,
    preset,
    preset_cameras,
    px_to_mm,
    quantized_jitter_variance,
    read_model,
    read_rif,
    surface_angle_deg,
    synth_plane,
    theoretical_axial_sigma,
    write_model,
    write_rif,
)

__all__ = [
    "CameraIntrinsics",
    "EstimationError",
    "FitError",
    "FormatError",
    "NoiseModel",
    "NoiseSample",
    "PlaneSceneSpec",
    "RangeImage",
    "SigmaValue",
    "__version__",
    "average_frames",
    "axial_noise_field",
    "compute_normals",
    "emulate_noise",
    "estimate_axial",
    "estimate_lateral",
    "extract_edge_pixels",
    "fit_line_odr",
    "fit_polynomial",
    "format_sigma",
    "ks_normality",
    "ks_threshold_5pct",
    "lateral_jitter_scale",
    "lowpass_reference",
    "mm_to_px",
    "preset",
    "preset_cameras",
    "px_to_mm",
    "quantized_jitter_variance",
    "read_model",
    "read_rif",
    "surface_angle_deg",
    "synth_plane",
    "theoretical_axial_sigma",
    "write_model",
    "write_rif",
]

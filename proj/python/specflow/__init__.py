"""Spectral optical flow: global least-squares velocity fields from image sequences."""

from ._specflow import (
    DegenerateDataError,
    ImageCube,
    SolverConvergenceError,
    SpectralVelocity,
    add_gaussian_noise,
    advect,
    apply_gradient,
    compare_fields,
    default_border,
    estimate,
    hexagonal_field,
    load_cube,
    load_velocity,
    make_texture,
    mark_missing,
    merit,
    random_field,
    save_cube,
    save_velocity,
    speed_histogram,
)

__all__ = [
    "DegenerateDataError",
    "ImageCube",
    "SolverConvergenceError",
    "SpectralVelocity",
    "add_gaussian_noise",
    "advect",
    "apply_gradient",
    "compare_fields",
    "default_border",
    "estimate",
    "hexagonal_field",
    "load_cube",
    "load_velocity",
    "make_texture",
    "mark_missing",
    "merit",
    "random_field",
    "save_cube",
    "save_velocity",
    "speed_histogram",
]

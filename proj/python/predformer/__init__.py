"""Gated-transformer video prediction: python bindings over the C++ core."""

from ._predformer import (  # noqa: F401
    ConfigError,
    IoError,
    PredFormer,
    ShapeError,
    __version__,
    count_params,
    estimate_flops,
    gen_moving_shapes,
    load_tensor,
    mae,
    mse,
    positional_encoding,
    preset_names,
    psnr,
    save_tensor,
    ssim,
    variant_names,
)

__all__ = [
    "ConfigError",
    "IoError",
    "PredFormer",
    "ShapeError",
    "__version__",
    "count_params",
    "estimate_flops",
    "gen_moving_shapes",
    "load_tensor",
    "mae",
    "mse",
    "positional_encoding",
    "preset_names",
    "psnr",
    "save_tensor",
    "ssim",
    "variant_names",
]

"""Cross-diffusion image denoising.

Images are float64 numpy arrays of shape (height, width).
"""

from ._core import (
    CrossdiffError,
    add_noise,
    check_hypothesis,
    denoise_cd,
    denoise_pm_grad,
    denoise_pm_lap,
    generate_synthetic,
    ncc,
    nlm,
    psnr,
    quality,
    read_pgm,
    run_method,
    snr,
    solve_steady,
    ssim,
    sweep,
    write_pgm,
    yaroslavsky,
)

__all__ = [
    "CrossdiffError",
    "add_noise",
    "check_hypothesis",
    "denoise_cd",
    "denoise_pm_grad",
    "denoise_pm_lap",
    "generate_synthetic",
    "ncc",
    "nlm",
    "psnr",
    "quality",
    "read_pgm",
    "run_method",
    "snr",
    "solve_steady",
    "ssim",
    "sweep",
    "write_pgm",
    "yaroslavsky",
]

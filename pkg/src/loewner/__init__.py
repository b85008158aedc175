"""Numerical toolkit for the chordal Loewner equation.

Forward direction: given a driving function, compute the curve it
generates in the upper half-plane (with scaled Brownian driving this
simulates SLE).  Inverse direction: given a curve, recover its driving
function by conformal unzipping.  Both directions come in a plain
O(N^2) form and a block-accelerated form built on truncated power series
of hat transforms ``1/f(1/z)``.
"""

from .drivers import (BridgeStream, DrivingPath, bridge_midpoint,
                      brownian_driver, constant_driver, from_samples,
                      sqrt_driver, walk_driver)
from .forward import (Trace, build_maps, default_block_size, point_at,
                      sle_adaptive, solve_blocked, solve_naive)
from .hatseries import (Block, BlockPlan, GateError, HatDirection, HatSeries,
                        build_forward_plan, compose, eval_via_hat, hat_of_map,
                        identity_series, radius_forward, radius_inverse, revert)
from .inverse import (CurveInput, SanitizeReport, SlitFitError, extract_blocked,
                      extract_naive, sanitize)
from .slitmap import (ConvergenceError, SlitKind, SlitMap, alpha_from_kappa,
                      apply_f, apply_h, c_alpha, fit_slit, kappa_from_alpha,
                      loewner_residual, make_tilted, make_vertical, tip)
from .stats import (BmDiagnostics, KappaReport, bm_diagnostics, estimate_kappa,
                    resample_to_grid, uniform_grid)

__version__ = "0.1.0"

__all__ = [
    "BridgeStream", "DrivingPath", "bridge_midpoint", "brownian_driver",
    "constant_driver", "from_samples", "sqrt_driver", "walk_driver",
    "Trace", "build_maps", "default_block_size", "point_at", "sle_adaptive",
    "solve_blocked", "solve_naive",
    "Block", "BlockPlan", "GateError", "HatDirection", "HatSeries",
    "build_forward_plan", "compose", "eval_via_hat", "hat_of_map",
    "identity_series", "radius_forward", "radius_inverse", "revert",
    "CurveInput", "SanitizeReport", "SlitFitError", "extract_blocked",
    "extract_naive", "sanitize",
    "ConvergenceError", "SlitKind", "SlitMap", "alpha_from_kappa", "apply_f",
    "apply_h", "c_alpha", "fit_slit", "kappa_from_alpha", "loewner_residual",
    "make_tilted", "make_vertical", "tip",
    "BmDiagnostics", "KappaReport", "bm_diagnostics", "estimate_kappa",
    "resample_to_grid", "uniform_grid",
    "__version__",
]

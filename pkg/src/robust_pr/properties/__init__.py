"""Empirical certification of range, growth and sharpness properties, plus
the deterministic inequalities and the ``e(s)`` integral behind them."""
from .arp import (
    ArpReport,
    PsiPrediction,
    TriangleCheck,
    arp_ratio_at,
    arp_ratio_exact_T,
    estimate_arp_psi,
    predicted_psi,
    recovery_bound_check,
    reverse_triangle_check,
)
from .ecurve import ECurvePoint, ECurveScan, e_curve_scan, e_of_s, write_curve_csv
from .growth import (
    AgpBand,
    agp_ratio,
    estimate_agp_band,
    mean_abs_gauss_check,
    mean_abs_ratio,
    predicted_agp_constants,
)
from .lemmas import (
    lemma1_quotient,
    lemma_rank2_check,
    lemma_sum_diff_check,
    quotient_grid,
    rank2_sweep,
    sum_diff_sweep,
)
from .sharpness import SharpnessReport, predicted_sharpness, sharpness_scan

__all__ = [
    "AgpBand", "ArpReport", "ECurvePoint", "ECurveScan", "PsiPrediction",
    "SharpnessReport", "TriangleCheck", "agp_ratio", "arp_ratio_at",
    "arp_ratio_exact_T", "e_curve_scan", "e_of_s", "estimate_agp_band",
    "estimate_arp_psi", "lemma1_quotient", "lemma_rank2_check",
    "lemma_sum_diff_check", "mean_abs_gauss_check", "mean_abs_ratio",
    "predicted_agp_constants", "predicted_psi", "predicted_sharpness",
    "quotient_grid", "rank2_sweep", "recovery_bound_check",
    "reverse_triangle_check", "sharpness_scan", "sum_diff_sweep",
    "write_curve_csv",
]

# analysis_engine.py - Fidelity-curve analysis
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from config import DEFAULT_SWEEP
from errors import NoBracket
from transport_experiment import breakdown_time


class AnalysisEngine:
    """Summaries and insights derived from sweep tables"""

    @staticmethod
    def calculate_curve_metrics(df: pd.DataFrame, threshold: float = DEFAULT_SWEEP["threshold"]
                                ) -> Dict[str, Any]:
        """Headline numbers of a fidelity-vs-t_f curve"""
        valid = df.dropna(subset=["fidelity"])
        if valid.empty:
            return {"points": len(df), "failed_points": len(df), "best_fidelity": np.nan,
                    "best_t_f": np.nan, "breakdown_t_f": None}
        best = valid.loc[valid["fidelity"].idxmax()]
        try:
            t_break = breakdown_time(valid, threshold)
        except NoBracket:
            t_break = None
        return {
            "points": len(df),
            "failed_points": int(df["fidelity"].isna().sum()),
            "best_fidelity": float(best["fidelity"]),
            "best_t_f": float(best["t_f_over_Tx"]),
            "min_fidelity": float(valid["fidelity"].min()),
            "points_above_threshold": int((valid["fidelity"] >= threshold).sum()),
            "breakdown_t_f": t_break,
            "threshold": threshold,
        }

    @staticmethod
    def generate_curve_insights(df: pd.DataFrame, threshold: float = DEFAULT_SWEEP["threshold"]) -> List[str]:
        metrics = AnalysisEngine.calculate_curve_metrics(df, threshold)
        insights = []
        if metrics["breakdown_t_f"] is not None:
            insights.append(f"Fidelity reaches {threshold:g} at t_f = {metrics['breakdown_t_f']:.3f} T_x")
        else:
            insights.append(f"Fidelity never crosses {threshold:g} from below in the sampled range")
        if not np.isnan(metrics["best_fidelity"]):
            insights.append(f"Best fidelity {metrics['best_fidelity']:.6f} at t_f = {metrics['best_t_f']:g} T_x")
        if metrics["failed_points"]:
            insights.append(f"⚠️ {metrics['failed_points']} sweep point(s) failed numerically")
        energy_gain = (df["E_final"] - df["E_initial"]).dropna()
        if not energy_gain.empty:
            insights.append(f"Largest residual excitation energy: {energy_gain.max():.4g} E_R")
        return insights

    @staticmethod
    def compare_curves(reference: pd.DataFrame, other: pd.DataFrame,
                       threshold: float = DEFAULT_SWEEP["threshold"]) -> Dict[str, Any]:
        """Breakdown-time shift between two curves (e.g. two depths or distances)"""
        ref = AnalysisEngine.calculate_curve_metrics(reference, threshold)
        oth = AnalysisEngine.calculate_curve_metrics(other, threshold)
        shift = None
        if ref["breakdown_t_f"] is not None and oth["breakdown_t_f"] is not None:
            shift = oth["breakdown_t_f"] - ref["breakdown_t_f"]
        return {"reference": ref, "other": oth, "breakdown_shift": shift}

    @staticmethod
    def robustness_summary(df: pd.DataFrame) -> Dict[str, float]:
        """Worst fidelity and its loss relative to the unperturbed point"""
        baseline = df.loc[df["magnitude_pct"] == 0, "fidelity"]
        worst = float(df["fidelity"].min())
        summary = {"worst_fidelity": worst}
        if not baseline.empty:
            summary["baseline_fidelity"] = float(baseline.iloc[0])
            summary["max_loss"] = float(baseline.iloc[0]) - worst
        return summary

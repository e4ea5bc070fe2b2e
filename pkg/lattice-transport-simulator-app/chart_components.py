# chart_components.py - Chart generation components
import os
from typing import Any, Dict, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


class ChartGenerator:
    """Centralized chart generation with consistent styling"""

    @staticmethod
    def setup_chart_styling() -> Dict[str, Any]:
        """Setup consistent chart styling configuration"""
        return {
            'linewidth': 2,
            'alpha': 0.7,
            'grid_alpha': 0.3,
            'figsize': (8, 5),
            'threshold_color': 'grey',
            'colors': ['#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd', '#8c564b'],
        }

    @staticmethod
    def create_fidelity_chart(curves: Dict[str, pd.DataFrame], ax: plt.Axes, style: Dict[str, Any],
                              threshold: float = 0.9):
        for index, (label, df) in enumerate(curves.items()):
            ax.plot(df["t_f_over_Tx"], df["fidelity"], marker="o", label=label,
                    linewidth=style['linewidth'], color=style['colors'][index % len(style['colors'])])
        ax.axhline(threshold, linestyle="--", color=style['threshold_color'], alpha=style['alpha'])
        ax.set_xlabel("t_f / T_x")
        ax.set_ylabel("Fidelity")
        ax.set_ylim(0, 1.02)
        ax.legend()
        ax.grid(True, alpha=style['grid_alpha'])

    @staticmethod
    def create_trajectory_chart(df: pd.DataFrame, axes, style: Dict[str, Any]):
        labels = {"q0": "q0 / l_x", "q0dot": "q0' (l_x/T_x)", "q0ddot": "q0'' (l_x/T_x^2)"}
        for ax, (column, label) in zip(axes, labels.items()):
            ax.plot(df["t"], df[column], linewidth=style['linewidth'], color=style['colors'][0])
            ax.set_ylabel(label)
            ax.grid(True, alpha=style['grid_alpha'])
        axes[-1].set_xlabel("t / T_x")


def plot_fidelity_curves(csv_paths: Sequence[str], out_png: str, threshold: float = 0.9) -> str:
    """Overlay the fidelity curves stored in sweep CSVs"""
    style = ChartGenerator.setup_chart_styling()
    curves = {os.path.splitext(os.path.basename(p))[0]: pd.read_csv(p) for p in csv_paths}
    fig, ax = plt.subplots(figsize=style['figsize'])
    ChartGenerator.create_fidelity_chart(curves, ax, style, threshold)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def plot_trajectory(csv_path: str, out_png: str) -> str:
    """Position, velocity and acceleration of a trajectory CSV"""
    style = ChartGenerator.setup_chart_styling()
    df = pd.read_csv(csv_path)
    fig, axes = plt.subplots(3, 1, figsize=(style['figsize'][0], 8), sharex=True)
    ChartGenerator.create_trajectory_chart(df, axes, style)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png

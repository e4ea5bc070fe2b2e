# data_processing.py - CSV/JSON export and table builders
import json
import logging
import os
import tempfile
from datetime import datetime, timezone
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from config import CSV_COLUMNS, CSV_FLOAT_FORMAT
from sta_trajectory import PolynomialTrajectory, aom_program

logger = logging.getLogger(__name__)

VERSION = "1.0.0"


class DataExporter:
    """Deterministic file output: fixed float format and atomic writes"""

    @staticmethod
    def write_csv(df: pd.DataFrame, path: str) -> str:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        handle, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(handle, "w", newline="") as stream:
                df.to_csv(stream, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
        logger.info(f"Wrote {len(df)} rows to {path}")
        return path

    @staticmethod
    def sidecar_path(csv_path: str) -> str:
        stem, _ = os.path.splitext(csv_path)
        return f"{stem}.meta.json"

    @classmethod
    def write_sidecar(cls, csv_path: str, resolved_config: Dict[str, Any],
                      extra: Optional[Dict[str, Any]] = None) -> str:
        """Metadata next to a CSV: creation time, version and the resolved configuration"""
        document = {
            "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            "version": VERSION,
            "config": resolved_config,
        }
        if extra:
            document.update(extra)
        path = cls.sidecar_path(csv_path)
        with open(path, "w") as stream:
            json.dump(document, stream, indent=2, sort_keys=True, default=_json_default)
            stream.write("\n")
        return path


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


class DataProcessor:
    """Builds the tables written by the CLI"""

    @staticmethod
    def trajectory_frame(traj: PolynomialTrajectory, T_x: float, l_x: float, n_samples: int = 201
                         ) -> pd.DataFrame:
        """q_0 and its derivatives with time in T_x and lengths in l_x"""
        times = np.linspace(0.0, traj.t_f, n_samples)
        return pd.DataFrame({
            "t": times / T_x,
            "q0": np.asarray(traj.eval(times)) / l_x,
            "q0dot": np.asarray(traj.eval(times, 1)) * T_x / l_x,
            "q0ddot": np.asarray(traj.eval(times, 2)) * T_x ** 2 / l_x,
        }, columns=CSV_COLUMNS["trajectory"])

    @staticmethod
    def aom_frame(traj: PolynomialTrajectory, T_x: float, n_samples: int = 201) -> pd.DataFrame:
        times, detuning = aom_program(traj, n_samples=n_samples)
        return pd.DataFrame({"t_in_Tx": times / T_x, "delta_f_times_Tx": detuning * T_x},
                            columns=CSV_COLUMNS["aom"])

    @staticmethod
    def density_frame(psi) -> pd.DataFrame:
        X, Y = psi.grid.mesh
        return pd.DataFrame({"x": X.ravel(), "y": Y.ravel(), "density": psi.density().ravel()},
                            columns=CSV_COLUMNS["density"])

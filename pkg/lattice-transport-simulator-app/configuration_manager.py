# configuration_manager.py - Run configuration loading, resolution and validation
import copy
import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

from config import (
    DEFAULT_GRID, DEFAULT_ITE, DEFAULT_LATTICE_PHASES, DEFAULT_STEPPER, DEFAULT_SWEEP, LATTICE_PRESETS,
)
from errors import InvalidConfigValue, UnknownConfigKey
from ground_state import ItetConfig
from lattice_potential import LatticeParams
from spectral_propagator import StepperConfig
from transport_experiment import GridSettings, TransportConfig
from validation import run_comprehensive_validation

logger = logging.getLogger(__name__)

NESTED_BLOCKS = ("grid", "stepper", "ite")


@dataclass
class RunConfig:
    """A resolved run document plus the subcommand it drives"""
    command: str
    document: Dict[str, Any]

    def lattice_params(self) -> LatticeParams:
        doc = self.document
        u_x, u_xbar, u_y = doc["depths_E_R"]
        return LatticeParams(u_x=u_x, u_xbar=u_xbar, u_y=u_y, theta=doc["theta_rad"],
                             phi=doc["phi_rad"], alpha=doc["alpha"])

    def transport_config(self) -> TransportConfig:
        doc = self.document
        return TransportConfig(
            lattice=self.lattice_params(),
            t_f_T_x=doc["t_f_T_x"],
            distance_x_l_x=doc["distance_x_l_x"],
            distance_y_l_x=doc["distance_y_l_x"],
            depth_scale=doc["depth_scale"],
            grid=GridSettings(**doc["grid"]),
            stepper=StepperConfig(**doc["stepper"]),
            ite=ItetConfig(**doc["ite"]),
            harmonic_mode=doc["harmonic_mode"],
        )


class ConfigurationManager:
    """Default document, file loading and override handling"""

    DEFAULT_RUN_CONFIG: Dict[str, Any] = {
        "lattice": "honeycomb",
        "depths_E_R": list(LATTICE_PRESETS["honeycomb"]["depths_E_R"]),
        **DEFAULT_LATTICE_PHASES,
        "depth_scale": 1.0,
        "distance_x_l_x": 100.0,
        "distance_y_l_x": 0.0,
        "t_f_T_x": 10.0,
        "t_f_list_T_x": list(DEFAULT_SWEEP["t_f_list_T_x"]),
        "grid": dict(DEFAULT_GRID),
        "stepper": dict(DEFAULT_STEPPER),
        "ite": dict(DEFAULT_ITE),
        "harmonic_mode": False,
        "threshold": DEFAULT_SWEEP["threshold"],
        "perturbation": "depth_error_pct",
        "magnitudes_pct": [-5.0, -2.0, 0.0, 2.0, 5.0],
        "jobs": None,
    }

    @classmethod
    def default_document(cls) -> Dict[str, Any]:
        return copy.deepcopy(cls.DEFAULT_RUN_CONFIG)

    @classmethod
    def resolve(cls, user_doc: Optional[Dict[str, Any]] = None,
                overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Merge a user document and flag overrides onto the defaults.

        A preset named under "lattice" supplies depths unless depths_E_R is
        given explicitly. Raises UnknownConfigKey / InvalidConfigValue.
        """
        user_doc = copy.deepcopy(user_doc or {})
        if not isinstance(user_doc, dict):
            raise InvalidConfigValue("configuration must be a JSON object")
        resolved = cls.default_document()
        for key, value in user_doc.items():
            if key not in resolved:
                raise UnknownConfigKey(f"unknown configuration key '{key}'")
            if key in NESTED_BLOCKS:
                if not isinstance(value, dict):
                    raise InvalidConfigValue(f"'{key}' must be an object")
                for sub_key in value:
                    if sub_key not in resolved[key]:
                        raise UnknownConfigKey(f"unknown configuration key '{key}.{sub_key}'")
                resolved[key].update(value)
            else:
                resolved[key] = value

        name = resolved["lattice"]
        if "depths_E_R" not in user_doc and name in LATTICE_PRESETS:
            resolved["depths_E_R"] = list(LATTICE_PRESETS[name]["depths_E_R"])

        for key, value in (overrides or {}).items():
            if value is None:
                continue
            block, _, sub_key = key.partition(".")
            if sub_key:
                resolved[block][sub_key] = value
            else:
                resolved[key] = value

        errors = run_comprehensive_validation(resolved)
        if errors:
            raise InvalidConfigValue("; ".join(errors))
        logger.debug(f"Resolved configuration: {resolved}")
        return resolved

    @classmethod
    def load_file(cls, path: str) -> Dict[str, Any]:
        try:
            with open(path) as stream:
                return json.load(stream)
        except json.JSONDecodeError as exc:
            raise InvalidConfigValue(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
        except OSError as exc:
            raise InvalidConfigValue(f"{path}: cannot read configuration ({exc.strerror})") from exc

    @classmethod
    def build_run_config(cls, command: str, path: Optional[str] = None,
                         overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
        user_doc = cls.load_file(path) if path else {}
        if isinstance(user_doc, dict):
            # sidecars wrap the resolved document under "config"
            if "config" in user_doc and "created_utc" in user_doc:
                user_doc = user_doc["config"]
        return RunConfig(command=command, document=cls.resolve(user_doc, overrides))

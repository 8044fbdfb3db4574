"""File-backed run configuration for the command-line front end.

A config is one JSON document with sections for the workload, the selection
knobs (optionally via a named preset), the cost model, the trigger policy and
the sweep axis. Unknown keys are rejected everywhere, and the parsed object
re-serializes to the exact input values.
"""

import copy
import dataclasses
import json

from .config import PRESETS, SelectionConfig, preset_config
from .costmodel import CostModelParams
from .errors import ConfigurationError
from .workload import WorkloadSpec


def _check_keys(section, data, allowed):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigurationError(
            f"unknown keys in {section!r}: {sorted(unknown)}"
        )


def _field_names(cls):
    return [f.name for f in dataclasses.fields(cls)]


class RunConfig:
    def __init__(self, raw):
        self.raw = copy.deepcopy(raw)
        _check_keys(
            "config",
            raw,
            [
                "workload",
                "selection",
                "cost_model",
                "policy",
                "trigger_mode",
                "thresholds_path",
                "output_dir",
                "calibration",
                "sweep",
            ],
        )

        wl = dict(raw.get("workload", {}))
        _check_keys("workload", wl, _field_names(WorkloadSpec))
        if "instability_schedule" in wl:
            wl["instability_schedule"] = tuple(
                (int(p), float(s)) for p, s in wl["instability_schedule"]
            )
        self.workload = WorkloadSpec(**wl)

        sel = dict(raw.get("selection", {}))
        _check_keys("selection", sel, _field_names(SelectionConfig) + ["preset"])
        preset = sel.pop("preset", None)
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigurationError(
                    f"unknown preset {preset!r}; choose from {sorted(PRESETS)}"
                )
            self.selection = preset_config(preset, **sel)
        else:
            self.selection = SelectionConfig(**sel)

        cm = dict(raw.get("cost_model", {}))
        _check_keys("cost_model", cm, _field_names(CostModelParams))
        self.cost_model = CostModelParams(**cm)

        self.policy = raw.get("policy", "dynamic")
        self.trigger_mode = raw.get("trigger_mode", "joint")
        self.thresholds_path = raw.get("thresholds_path")
        self.output_dir = raw.get("output_dir", "out")

        cal = dict(raw.get("calibration", {}))
        _check_keys("calibration", cal, ["percentile", "pages"])
        self.calibration_percentile = float(cal.get("percentile", 0.99))
        self.calibration_pages = int(cal.get("pages", 320))
        if not 0.0 < self.calibration_percentile < 1.0:
            raise ConfigurationError(
                f"calibration percentile must be in (0, 1), "
                f"got {self.calibration_percentile}"
            )

        sweep = dict(raw.get("sweep", {}))
        _check_keys("sweep", sweep, ["axis", "values"])
        self.sweep_axis = sweep.get("axis")
        self.sweep_values = sweep.get("values", [])
        if self.sweep_axis is not None and self.sweep_axis not in (
            "budget",
            "context_length",
            "policy",
        ):
            raise ConfigurationError(
                f"sweep axis must be budget, context_length or policy, "
                f"got {self.sweep_axis!r}"
            )

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls(json.load(fh))

    def to_dict(self):
        return copy.deepcopy(self.raw)

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

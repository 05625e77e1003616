"""Run-configuration files.

A run config is a JSON object with keys

    law            {"terms": [[a, b], ...]} or {"constant": mu}
    nu, gamma      admissibility constants (N defaults to the grid dimension)
    dim, cells     1 or 2; cells is an int or list of ints per axis
    lengths        optional, defaults to 1.0 per axis
    cfl, t_end, integrator, eps_vac, ledger_stride
    delta, alpha   optional moment exponents
    initial        {"preset": name, "params": {...}} or {"checkpoint": path}
    study          optional {"sigma0": ..., "n_max": ...} for stability studies
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .diagnostics import MomentParams
from .grid import PeriodicGrid, State, load_checkpoint
from .harness import InitialDataSpec
from .presets import make_initial
from .solver import SolverConfig
from .viscosity import AdmissibilityParams, ViscosityLaw


class ConfigError(ValueError):
    """Malformed run configuration."""


@dataclass
class RunSetup:
    config: SolverConfig
    initial: State
    study: InitialDataSpec | None = None
    initial_spec: dict | None = None


def _require(obj: dict, key: str):
    if key not in obj:
        raise ConfigError(f"config is missing required key {key!r}")
    return obj[key]


def parse_config(obj: dict) -> RunSetup:
    try:
        law = ViscosityLaw.from_json(_require(obj, "law"))
        dim = int(_require(obj, "dim"))
        cells = obj.get("cells", 128)
        sizes = tuple(cells) if isinstance(cells, (list, tuple)) else tuple(
            [int(cells)] * dim
        )
        if len(sizes) != dim:
            raise ConfigError(f"cells {cells} does not match dim {dim}")
        lengths = tuple(obj.get("lengths", [1.0] * dim))
        grid = PeriodicGrid(sizes, lengths)
        params = AdmissibilityParams(
            nu=float(_require(obj, "nu")),
            gamma=float(_require(obj, "gamma")),
            N=int(obj.get("N", dim)),
            eps_growth=float(obj.get("eps_growth", 0.1)),
        )
        moment = MomentParams(
            delta=float(obj.get("delta", 0.05)), alpha=float(obj.get("alpha", 0.02))
        )
        config = SolverConfig(
            law=law,
            params=params,
            grid=grid,
            t_end=float(_require(obj, "t_end")),
            cfl=float(obj.get("cfl", 0.4)),
            integrator=obj.get("integrator", "RK2_SSP"),
            eps_vac=obj.get("eps_vac"),
            ledger_stride=int(obj.get("ledger_stride", 10)),
            moment=moment,
            limiter=obj.get("limiter", "mc"),
            allow_non_admissible=bool(obj.get("allow_non_admissible", False)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    init_spec = _require(obj, "initial")
    if "checkpoint" in init_spec:
        initial, ck_grid = load_checkpoint(init_spec["checkpoint"])
        if ck_grid.sizes != grid.sizes or ck_grid.lengths != grid.lengths:
            raise ConfigError(
                f"checkpoint grid {ck_grid.sizes} does not match config grid {grid.sizes}"
            )
    elif "preset" in init_spec:
        initial = make_initial(init_spec["preset"], grid, init_spec.get("params"))
    else:
        raise ConfigError("initial needs either 'preset' or 'checkpoint'")

    study = None
    if "study" in obj:
        s = obj["study"]
        if "preset" not in init_spec:
            raise ConfigError("stability studies need a preset initial profile")
        study = InitialDataSpec(
            base_preset=init_spec["preset"],
            base_params=init_spec.get("params", {}),
            sigma0=float(s.get("sigma0", 0.1)),
            n_max=int(s.get("n_max", 4)),
        )
    return RunSetup(config=config, initial=initial, study=study, initial_spec=init_spec)


def load_config(path) -> RunSetup:
    with open(path) as fh:
        return parse_config(json.load(fh))

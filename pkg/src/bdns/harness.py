"""Stability-of-weak-solutions experiment: mollified initial-data sequences,
batched runs, and pairwise compactness metrics.

A study takes one base profile, produces a sequence of initial states by
mollifying sqrt(rho) (not rho, so the weighted density-gradient hypothesis
stays uniformly bounded) and the velocity with periodic Gaussians of
geometrically shrinking width, gates every member on the finiteness of the
initial-data hypotheses, runs the solver per member, and measures the three
convergence distances of the stability statement between members:

* d_rho: sup over time of the L^{3/2} density distance,
* d_u:   space-time L^2 distance of the weighted velocities sqrt(rho) u,
* d_m:   space-time L^1 distance of the momenta.

"Up to a subsequence" is not algorithmic, so the study reports
consecutive-pair distances of the generated sequence (Cauchy behaviour)
instead of extracting subsequences.  Cross-member norms use the ledger
times of the coarsest-sampled run, other members linearly interpolated in
time.  Member runs execute concurrently; the BDNS_THREADS environment
variable caps the parallelism.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import EntropyLedger, TIME_AGGREGATION
from .grid import PeriodicGrid, State, derived, grad, integrate, lp_norm
from .presets import make_initial
from .solver import SolverConfig, Trajectory, run

METRIC_TOL = 1e-12
UNIFORMITY_FACTOR = 10.0


class GenerationError(ValueError):
    """Initial-data hypothesis failed for a generated member."""


@dataclass(frozen=True)
class InitialDataSpec:
    """Base profile plus mollification schedule sigma_n = sigma0 * 2^-n."""

    base_preset: str
    base_params: dict = field(default_factory=dict)
    sigma0: float = 0.1
    n_max: int = 4

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")


def _mollify(f: np.ndarray, grid: PeriodicGrid, sigma: float) -> np.ndarray:
    """Periodic Gaussian smoothing by Fourier multiplier exp(-|k|^2 sigma^2 / 2)."""
    fh = np.fft.fftn(f)
    k2 = np.zeros(grid.sizes)
    for a in range(grid.dim):
        k2 = k2 + grid.wavenumbers(a) ** 2
    return np.real(np.fft.ifftn(fh * np.exp(-0.5 * k2 * sigma * sigma)))


def hypothesis_functionals(state: State, grid: PeriodicGrid, law, gamma: float,
                           delta: float, eps_vac: float) -> dict[str, float]:
    """The initial-data finiteness checks: energy, weighted density-gradient
    integral (vacuum-safe form 4 int h'^2 |grad sqrt(rho)|^2), and the
    velocity moment."""
    d = derived(state, grid, eps_vac)
    rho = np.maximum(state.rho, 0.0)
    sru2 = np.sum(d.sqrt_rho_u**2, axis=0)
    gsr = grad(d.sqrt_rho, grid)
    hp = law.h_prime(rho)
    umag = np.sqrt(np.sum(d.u**2, axis=0))
    return {
        "energy": integrate(0.5 * sru2 + rho**gamma / (gamma - 1.0), grid),
        "grad_h_over_rho": 4.0 * integrate(hp**2 * np.sum(gsr**2, axis=0), grid),
        "moment": integrate(0.5 * sru2 * umag**delta, grid),
    }


def generate_sequence(spec: InitialDataSpec, grid: PeriodicGrid, law, gamma: float,
                      delta: float, eps_vac: float):
    """Mollified members n = 0..n_max.  Returns (states, hypothesis table);
    the table also carries the L1 distance of each member's density to the
    base profile."""
    base = make_initial(spec.base_preset, grid, spec.base_params)
    sqrt_rho0 = np.sqrt(np.maximum(base.rho, 0.0))
    wet = base.rho > eps_vac
    u0 = np.where(wet, base.mom / np.where(wet, base.rho, 1.0), 0.0)

    states: list[State] = []
    table: list[dict[str, float]] = []
    for n in range(spec.n_max + 1):
        sigma = spec.sigma0 * 2.0**-n
        s = _mollify(sqrt_rho0, grid, sigma)
        rho = s * s
        u = np.stack([_mollify(u0[a], grid, sigma) for a in range(grid.dim)])
        mom = rho * u
        mom[:, rho <= eps_vac] = 0.0
        st = State(0.0, rho, mom)
        vals = hypothesis_functionals(st, grid, law, gamma, delta, eps_vac)
        for name, v in vals.items():
            if not math.isfinite(v):
                raise GenerationError(
                    f"member {n}: initial-data hypothesis '{name}' is not finite"
                )
        vals["l1_distance_to_base"] = lp_norm(rho - base.rho, grid, 1)
        vals["sigma"] = sigma
        table.append(vals)
        states.append(st)

    ref = table[0]
    for n, vals in enumerate(table):
        for name in ("energy", "grad_h_over_rho", "moment"):
            if vals[name] > UNIFORMITY_FACTOR * max(ref[name], 1e-300):
                vals[f"flag_{name}"] = 1.0
    return states, table


@dataclass
class StabilityStudy:
    """Per-member runs plus the pairwise compactness distance matrices."""

    members: list[dict]
    trajectories: list[Trajectory | None]
    ledgers: list[EntropyLedger | None]
    common_times: np.ndarray
    d_rho: np.ndarray
    d_u: np.ndarray
    d_m: np.ndarray
    vacuum: list[float]
    uniform_bounds: dict[str, float]
    uniform_bounds_per_member: dict[str, list[float]]
    partial: bool = False
    failures: list[str] = field(default_factory=list)
    metric_axioms_ok: bool = True

    def consecutive(self, which: str) -> list[float]:
        mat = {"rho": self.d_rho, "u": self.d_u, "m": self.d_m}[which]
        return [float(mat[n, n + 1]) for n in range(mat.shape[0] - 1)]

    def to_json(self, ledger_paths: list[str] | None = None) -> dict:
        return {
            "members": ledger_paths if ledger_paths is not None
            else [f"member_{i}" for i in range(len(self.members))],
            "d_rho": self.d_rho.tolist(),
            "d_u": self.d_u.tolist(),
            "d_m": self.d_m.tolist(),
            "vacuum": list(self.vacuum),
            "uniform_bounds": dict(self.uniform_bounds),
            "uniform_bounds_per_member": {
                k: list(v) for k, v in self.uniform_bounds_per_member.items()
            },
            "partial": self.partial,
            "failures": list(self.failures),
            "hypothesis_table": self.members,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _interp_state(traj: Trajectory, t: float) -> tuple[np.ndarray, np.ndarray]:
    times = np.asarray(traj.times)
    i = int(np.searchsorted(times, t, side="right")) - 1
    i = max(0, min(i, len(times) - 2))
    t0, t1 = times[i], times[i + 1]
    lam = 0.0 if t1 <= t0 else min(max((t - t0) / (t1 - t0), 0.0), 1.0)
    rho = (1.0 - lam) * traj.states[i].rho + lam * traj.states[i + 1].rho
    mom = (1.0 - lam) * traj.states[i].mom + lam * traj.states[i + 1].mom
    return rho, mom


def _check_metric_axioms(mat: np.ndarray) -> bool:
    n = mat.shape[0]
    scale = max(float(np.max(mat)), 1.0)
    if np.any(np.abs(np.diag(mat)) > METRIC_TOL * scale):
        return False
    if np.any(np.abs(mat - mat.T) > METRIC_TOL * scale):
        return False
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if mat[i, j] > mat[i, k] + mat[k, j] + METRIC_TOL * scale:
                    return False
    return True


def run_study(spec: InitialDataSpec, config: SolverConfig,
              n_max: int | None = None) -> StabilityStudy:
    """Generate the mollified sequence, run every member, and assemble the
    distance matrices and uniform-bound report."""
    grid = config.grid
    if n_max is None:
        n_max = spec.n_max
    spec = InitialDataSpec(spec.base_preset, spec.base_params, spec.sigma0, n_max)
    eps_vac = config.eps_vac
    if eps_vac is None:
        probe = make_initial(spec.base_preset, grid, spec.base_params)
        eps_vac = 1e-10 * max(float(np.max(probe.rho)), 1e-30)
    from dataclasses import replace

    cfg = replace(config, eps_vac=eps_vac)
    states, table = generate_sequence(spec, grid, cfg.law, cfg.gamma,
                                      cfg.moment.delta, eps_vac)

    workers = int(os.environ.get("BDNS_THREADS", "0")) or min(len(states), os.cpu_count() or 1)
    results: list[tuple[Trajectory, EntropyLedger] | Exception] = [None] * len(states)

    def worker(i):
        try:
            return run(cfg, states[i])
        except Exception as exc:  # noqa: BLE001 - member failures mark the study partial
            return exc

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for i, res in enumerate(pool.map(worker, range(len(states)))):
            results[i] = res

    trajectories: list[Trajectory | None] = []
    ledgers: list[EntropyLedger | None] = []
    failures = []
    for i, res in enumerate(results):
        if isinstance(res, Exception):
            trajectories.append(None)
            ledgers.append(None)
            failures.append(f"member {i}: {res}")
        else:
            trajectories.append(res[0])
            ledgers.append(res[1])

    alive = [i for i, t in enumerate(trajectories) if t is not None]
    if not alive:
        raise RuntimeError("every study member failed: " + "; ".join(failures))
    coarsest = min(alive, key=lambda i: len(trajectories[i].times))
    common_times = np.asarray(trajectories[coarsest].times)

    n_members = len(states)
    d_rho = np.zeros((n_members, n_members))
    d_u = np.zeros((n_members, n_members))
    d_m = np.zeros((n_members, n_members))

    interp = {}
    for i in alive:
        series = [_interp_state(trajectories[i], t) for t in common_times]
        sru = []
        for rho, mom in series:
            wet = rho > eps_vac
            sru.append(np.where(wet, mom / np.sqrt(np.where(wet, rho, 1.0)), 0.0))
        interp[i] = (series, sru)

    for ai, i in enumerate(alive):
        for j in alive[ai + 1:]:
            si, sri = interp[i]
            sj, srj = interp[j]
            rr = max(
                lp_norm(si[k][0] - sj[k][0], grid, 1.5) for k in range(len(common_times))
            )
            uu2 = np.array([
                lp_norm(sri[k] - srj[k], grid, 2) ** 2 for k in range(len(common_times))
            ])
            mm = np.array([
                lp_norm(si[k][1] - sj[k][1], grid, 1) for k in range(len(common_times))
            ])
            d_rho[i, j] = d_rho[j, i] = rr
            d_u[i, j] = d_u[j, i] = math.sqrt(max(np.trapezoid(uu2, common_times), 0.0))
            d_m[i, j] = d_m[j, i] = float(np.trapezoid(mm, common_times))

    vacuum = []
    for i in range(n_members):
        if trajectories[i] is None:
            vacuum.append(float("nan"))
            continue
        v = 0.0
        for st in trajectories[i].states:
            dry = st.rho <= eps_vac
            v = max(v, integrate(np.sum(np.abs(st.mom), axis=0) * dry, grid))
        vacuum.append(v)

    per_member: dict[str, list[float]] = {name: [] for name in TIME_AGGREGATION}
    for i in range(n_members):
        agg = ledgers[i].aggregate_bounds() if ledgers[i] is not None else {}
        for name in TIME_AGGREGATION:
            per_member[name].append(agg.get(name, float("nan")))
    uniform = {
        name: float(np.nanmax(vals)) if len(vals) else float("nan")
        for name, vals in per_member.items()
    }

    axioms = all(_check_metric_axioms(m) for m in (d_rho, d_u, d_m))
    return StabilityStudy(
        members=table,
        trajectories=trajectories,
        ledgers=ledgers,
        common_times=common_times,
        d_rho=d_rho,
        d_u=d_u,
        d_m=d_m,
        vacuum=vacuum,
        uniform_bounds=uniform,
        uniform_bounds_per_member=per_member,
        partial=bool(failures),
        failures=failures,
        metric_axioms_ok=axioms,
    )

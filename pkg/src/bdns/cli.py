"""Command-line driver.

Subcommands:

    validate-law       check a coefficient pair against the admissibility
                       conditions; emits the per-condition report as JSON
    simulate           advance a run config to t_end; optional checkpoint
                       and ledger outputs
    verify-identities  certify the entropy-balance identities on seeded
                       manufactured fields
    stability-study    run a mollified-sequence study and emit the report

Exit codes: 0 success, 1 verdict failure or aborted run, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, load_config
from .grid import save_checkpoint
from .harness import GenerationError, run_study
from .identities import manufactured_field, run_all_identities
from .solver import NonAdmissibleLawError, SolverError, run
from .viscosity import LawError, TamperedLaw, ViscosityLaw, validate


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bdns",
        description="degenerate-viscosity compressible flow laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate-law", help="check admissibility conditions")
    p_val.add_argument("--config", required=True, help="run config JSON")
    p_val.add_argument("--out", help="write the report JSON here")

    p_sim = sub.add_parser("simulate", help="advance a configured run")
    p_sim.add_argument("--config", required=True, help="run config JSON")
    p_sim.add_argument("--checkpoint", help="write the final state here (.bdns)")
    p_sim.add_argument("--ledger", help="write the diagnostics ledger CSV here")
    p_sim.add_argument("--jsonl", action="store_true",
                       help="also mirror the ledger as JSON lines")

    p_ver = sub.add_parser("verify-identities", help="certify entropy identities")
    p_ver.add_argument("--law", required=True,
                       help='law JSON, e.g. \'{"terms": [[1, 1]]}\'')
    p_ver.add_argument("--gamma", type=float, default=2.0)
    p_ver.add_argument("--dims", default="1,2", help="comma-separated dimensions")
    p_ver.add_argument("--grids", default="32,64,128", help="comma-separated cell counts")
    p_ver.add_argument("--delta", type=float, default=0.05)
    p_ver.add_argument("--nu", type=float, default=None)
    p_ver.add_argument("--g-override", type=float, default=None,
                       help="replace g by a constant (negative control)")
    p_ver.add_argument("--seed", type=int, default=7)
    p_ver.add_argument("--out", help="write the report JSON here")

    p_st = sub.add_parser("stability-study", help="mollified-sequence study")
    p_st.add_argument("--config", required=True,
                      help="run config JSON with a 'study' block")
    p_st.add_argument("--out", help="write the study report JSON here")
    p_st.add_argument("--ledger-dir", help="write per-member ledger CSVs here")
    return parser


def _load(path):
    try:
        return load_config(path)
    except FileNotFoundError as exc:
        raise _Usage(f"config file not found: {exc.filename}") from exc
    except (ConfigError, json.JSONDecodeError) as exc:
        raise _Usage(f"bad config: {exc}") from exc


class _Usage(Exception):
    pass


def _cmd_validate_law(args) -> int:
    setup = _load(args.config)
    report = validate(setup.config.law, setup.config.params)
    text = report.dumps()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report.overall else 1


def _cmd_simulate(args) -> int:
    setup = _load(args.config)
    try:
        traj, ledger = run(setup.config, setup.initial)
    except (SolverError, NonAdmissibleLawError, ValueError) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 1
    if args.checkpoint:
        save_checkpoint(args.checkpoint, traj.final_state, setup.config.grid)
    if args.ledger:
        ledger.to_csv(args.ledger)
        if args.jsonl:
            ledger.to_jsonl(args.ledger + ".jsonl")
    print(
        f"steps={traj.step_count} t={traj.final_state.t:.6g} "
        f"clamped_cells={traj.clamp_count} vacuum_zeroed={traj.vacuum_zero_count} "
        f"E_final={traj.step_energies[-1]:.12g}"
    )
    return 0


def _cmd_verify_identities(args) -> int:
    try:
        law = ViscosityLaw.from_json(json.loads(args.law))
    except (json.JSONDecodeError, LawError) as exc:
        raise _Usage(f"bad --law: {exc}") from exc
    if args.g_override is not None:
        law = TamperedLaw(law, args.g_override)
    try:
        dims = [int(d) for d in args.dims.split(",") if d]
        grids = [int(n) for n in args.grids.split(",") if n]
    except ValueError as exc:
        raise _Usage(f"bad --dims/--grids: {exc}") from exc

    reports = []
    for dim in dims:
        mf = manufactured_field(dim, seed=args.seed + dim)
        reports.extend(
            run_all_identities(mf, law, args.gamma, grids, delta=args.delta, nu=args.nu)
        )
    payload = [r.to_json() for r in reports]
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    ok = all(r.verdict for r in reports)
    for r in reports:
        worst = max((v[-1] for v in r.residuals.values()), default=0.0)
        print(f"{'PASS' if r.verdict else 'FAIL'} {r.identity}: finest residual {worst:.3e}")
    return 0 if ok else 1


def _cmd_stability_study(args) -> int:
    setup = _load(args.config)
    if setup.study is None:
        raise _Usage("config has no 'study' block")
    try:
        study = run_study(setup.study, setup.config)
    except (GenerationError, SolverError, NonAdmissibleLawError, ValueError) as exc:
        print(f"study aborted: {exc}", file=sys.stderr)
        return 1
    ledger_paths = None
    if args.ledger_dir:
        import os

        os.makedirs(args.ledger_dir, exist_ok=True)
        ledger_paths = []
        for i, ledger in enumerate(study.ledgers):
            path = os.path.join(args.ledger_dir, f"member_{i}.csv")
            if ledger is not None:
                ledger.to_csv(path)
            ledger_paths.append(path)
    text = json.dumps(study.to_json(ledger_paths), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    for name in ("rho", "u", "m"):
        print(f"d_{name} consecutive: "
              + " ".join(f"{v:.3e}" for v in study.consecutive(name)))
    if study.partial:
        print("study PARTIAL: " + "; ".join(study.failures), file=sys.stderr)
        return 1
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help
        return int(exc.code or 0)
    handlers = {
        "validate-law": _cmd_validate_law,
        "simulate": _cmd_simulate,
        "verify-identities": _cmd_verify_identities,
        "stability-study": _cmd_stability_study,
    }
    try:
        return handlers[args.command](args)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


def main():
    raise SystemExit(cli_main())

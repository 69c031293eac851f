"""Experiment runner: seeded parallel chains, sweep campaigns, CSV output.

A RunConfig fully determines one simulation: model parameters, basis,
sweep budget, chain count, and master seed. The sweep budget is the
total across chains (chain k receives an equal share and its own rng
stream derived from the master seed by counter), so the default 20,000
sweeps over 4 chains reproduce the standard measurement protocol.
Identical configs give byte-identical outputs.

Campaigns scan one axis (joint shift, x-shift only, size, temperature,
anisotropy) and emit one CSV row per grid point plus a JSON sidecar
recording the full provenance. Grid points that fail validation produce
an error row instead of aborting the campaign.

CLI verbs: run, campaign, ed, contract-check, oracle-check. Options may
come from a UTF-8 key=value config file, with command-line flags taking
precedence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ed
from .contraction import contract
from .estimators import average_sign, energy
from .model import BondTerm, ModelSpec, PauliFlavor, active_terms, term_matrix
from .oracle import ancilla_weight
from .sampler import (
    Configuration,
    SweepPlan,
    rng_stream,
    run_chain,
    weight,
)
from .statevec import BasisChoice, BasisLabel, default_rotation

__all__ = [
    "RunConfig",
    "CampaignSpec",
    "ResultRecord",
    "run",
    "campaign",
    "write_campaign_csv",
    "random_contraction_check",
    "random_weight_equivalence_check",
    "main",
]

AXES = ("m_joint", "m_x_only", "size", "temperature", "anisotropy")

CSV_FIELDS = [
    "axis",
    "axis_value",
    "n_sites",
    "delta",
    "m_x",
    "m_z",
    "temperature",
    "sweeps",
    "warmup_fraction",
    "chains",
    "seed",
    "basis",
    "avg_sign",
    "avg_sign_err",
    "energy",
    "energy_err",
    "avg_order",
    "avg_order_err",
    "energy_ed",
    "abs_energy_diff",
    "pct_stderr_vs_ed",
    "reliable",
    "error",
]


@dataclass(frozen=True)
class RunConfig:
    """One simulation: model, basis, sweep protocol, seeding, parallelism."""

    n_sites: int = 3
    delta: float = 1.0
    m_x: float = 1.0
    m_z: float = 1.0
    temperature: float = 2.0
    sweeps: int = 20000
    warmup_fraction: float = 0.1
    chains: int = 4
    seed: int = 1
    basis: str = "rotated"
    rotate_sites: tuple[int, ...] | None = None
    plan_alpha: int | None = None
    plan_string: int | None = None
    plan_insert: int | None = None
    workers: int = 1
    n_bins: int = 20

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.chains < 1:
            raise ValueError(f"need at least one chain, got {self.chains}")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError(
                f"warmup fraction must lie in [0, 1), got {self.warmup_fraction}"
            )
        if self.basis not in ("z", "rotated"):
            raise ValueError(f"basis must be 'z' or 'rotated', got {self.basis!r}")
        if self.sweeps < self.chains:
            raise ValueError("fewer sweeps than chains")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    def model_spec(self) -> ModelSpec:
        return ModelSpec(
            n_sites=self.n_sites,
            delta=self.delta,
            m_x=self.m_x,
            m_z=self.m_z,
            beta=self.beta,
        )

    def basis_choice(self) -> BasisChoice:
        if self.basis == "z":
            return BasisChoice.z_product()
        if self.rotate_sites is None:
            return BasisChoice.rotated()
        rotations = [np.eye(2, dtype=complex) for _ in range(self.n_sites)]
        for site in self.rotate_sites:
            if not 0 <= site < self.n_sites:
                raise ValueError(f"rotate_sites entry {site} outside chain")
            rotations[site] = default_rotation()
        return BasisChoice.rotated(rotations)

    def sweep_plan(self) -> SweepPlan:
        return SweepPlan(
            alpha_updates=self.plan_alpha if self.plan_alpha is not None else self.n_sites,
            string_updates=self.plan_string,
            insert_remove_updates=(
                self.plan_insert if self.plan_insert is not None else self.n_sites
            ),
        )

    def chain_schedule(self) -> list[tuple[int, int]]:
        """Per-chain (sweeps, warmup_sweeps); the total budget splits evenly."""
        base, rem = divmod(self.sweeps, self.chains)
        schedule = []
        for k in range(self.chains):
            total = base + (1 if k < rem else 0)
            warmup = int(round(self.warmup_fraction * total))
            warmup = min(warmup, total - 1)
            schedule.append((total, warmup))
        return schedule


@dataclass(frozen=True)
class ResultRecord:
    """Merged-chain estimates plus the exact-diagonalization reference."""

    config: RunConfig
    avg_sign: float
    avg_sign_err: float
    energy: float
    energy_err: float
    avg_order: float
    avg_order_err: float
    energy_ed: float
    abs_energy_diff: float
    pct_stderr_vs_ed: float
    reliable: bool

    def as_dict(self) -> dict:
        out = {
            "n_sites": self.config.n_sites,
            "delta": self.config.delta,
            "m_x": self.config.m_x,
            "m_z": self.config.m_z,
            "temperature": self.config.temperature,
            "sweeps": self.config.sweeps,
            "warmup_fraction": self.config.warmup_fraction,
            "chains": self.config.chains,
            "seed": self.config.seed,
            "basis": _basis_label(self.config),
        }
        out.update(
            avg_sign=self.avg_sign,
            avg_sign_err=self.avg_sign_err,
            energy=self.energy,
            energy_err=self.energy_err,
            avg_order=self.avg_order,
            avg_order_err=self.avg_order_err,
            energy_ed=self.energy_ed,
            abs_energy_diff=self.abs_energy_diff,
            pct_stderr_vs_ed=self.pct_stderr_vs_ed,
            reliable=self.reliable,
        )
        return out


def _basis_label(config: RunConfig) -> str:
    if config.basis == "z":
        return "z"
    if config.rotate_sites is None:
        return "rotated"
    return "rotated:" + ",".join(str(s) for s in config.rotate_sites)


def _chain_worker(job: tuple[RunConfig, int]):
    config, k = job
    spec = config.model_spec()
    basis = config.basis_choice()
    plan = config.sweep_plan()
    total, warmup = config.chain_schedule()[k]
    acc, _ = run_chain(
        spec, basis, plan, rng_stream(config.seed, stream=k),
        sweeps=total, warmup_sweeps=warmup, n_bins=config.n_bins,
    )
    return acc


def run(config: RunConfig) -> ResultRecord:
    """Execute all chains of a config and merge their estimates."""
    spec = config.model_spec()
    config.basis_choice()
    for total, warmup in config.chain_schedule():
        if total - warmup < config.n_bins:
            raise ValueError(
                f"each chain must keep at least {config.n_bins} samples; "
                f"got {total - warmup} (sweeps={config.sweeps}, chains={config.chains})"
            )
    jobs = [(config, k) for k in range(config.chains)]
    if config.workers > 1 and config.chains > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            accs = list(pool.map(_chain_worker, jobs))
    else:
        accs = [_chain_worker(job) for job in jobs]
    merged = accs[0]
    for extra in accs[1:]:
        merged.absorb(extra)

    sign_est = average_sign(merged)
    energy_est = energy(merged, spec)
    e_ref = ed.thermal_energy(spec)
    pct = (
        abs(energy_est.stderr / e_ref) * 100.0
        if e_ref != 0.0 and math.isfinite(energy_est.stderr)
        else float("nan")
    )
    return ResultRecord(
        config=config,
        avg_sign=sign_est.value,
        avg_sign_err=sign_est.stderr,
        energy=energy_est.value,
        energy_err=energy_est.stderr,
        avg_order=energy_est.order_value,
        avg_order_err=energy_est.order_stderr,
        energy_ed=e_ref,
        abs_energy_diff=abs(energy_est.value - e_ref),
        pct_stderr_vs_ed=pct,
        reliable=energy_est.reliable,
    )


@dataclass(frozen=True)
class CampaignSpec:
    """One scan axis, its grid, and the base config every point derives from."""

    axis: str
    grid: tuple[float, ...]
    base: RunConfig

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if len(self.grid) == 0:
            raise ValueError("grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")


def apply_axis(base: RunConfig, axis: str, value: float) -> RunConfig:
    if axis == "m_joint":
        return dataclasses.replace(base, m_x=value, m_z=value)
    if axis == "m_x_only":
        return dataclasses.replace(base, m_x=value)
    if axis == "size":
        if value != int(value):
            raise ValueError(f"size grid values must be integers, got {value}")
        return dataclasses.replace(base, n_sites=int(value))
    if axis == "temperature":
        return dataclasses.replace(base, temperature=value)
    if axis == "anisotropy":
        return dataclasses.replace(base, delta=value)
    raise ValueError(f"unknown axis {axis!r}")


def campaign(spec: CampaignSpec) -> list[dict]:
    """Run every grid point; failures become error rows, not aborts."""
    rows = []
    for value in spec.grid:
        row = {field: "" for field in CSV_FIELDS}
        row["axis"] = spec.axis
        row["axis_value"] = value
        try:
            point = apply_axis(spec.base, spec.axis, value)
            record = run(point)
            row.update(record.as_dict())
        except ValueError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_campaign_csv(rows: list[dict], path: Path, spec: CampaignSpec) -> None:
    """CSV table plus a JSON sidecar with full provenance."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow([_format_cell(row[field]) for field in CSV_FIELDS])
    sidecar = {
        "schema": CSV_FIELDS,
        "axis": spec.axis,
        "grid": list(spec.grid),
        "base_config": dataclasses.asdict(spec.base),
        "git_revision": _git_revision(),
        "rows": len(rows),
    }
    Path(str(path) + ".meta.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _git_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except OSError:
        return "unknown"
    if out.returncode != 0:
        return "unknown"
    return out.stdout.strip()


# ---------------------------------------------------------------------------
# Randomized self-checks (also exposed as CLI verbs)

def random_bond_term(rng: np.random.Generator, n_sites: int,
                     mixed_signs: bool = True) -> BondTerm:
    """Random term with mixed shifts; shift lands exactly on 1 half the time."""
    flavor = PauliFlavor.ZZ if rng.random() < 0.5 else PauliFlavor.XX
    shift = 1.0 if rng.random() < 0.5 else float(rng.uniform(0.2, 2.5))
    coupling = float(rng.uniform(0.25, 1.5))
    sign = -1 if (not mixed_signs or rng.random() < 0.5) else 1
    return BondTerm(int(rng.integers(n_sites)), flavor, coupling, shift, sign)


def _dense_product(string: list[BondTerm], n_sites: int) -> np.ndarray:
    out = np.eye(2 ** n_sites)
    for term in string:
        out = term_matrix(term, n_sites) @ out
    return out


def random_contraction_check(count: int, seed: int, max_sites: int = 4,
                             max_len: int = 8) -> float:
    """Max relative deviation of prefactor*contracted vs original products."""
    rng = rng_stream(seed)
    worst = 0.0
    for _ in range(count):
        n_sites = int(rng.integers(2, max_sites + 1))
        length = int(rng.integers(0, max_len + 1))
        string = [random_bond_term(rng, n_sites) for _ in range(length)]
        original = _dense_product(string, n_sites)
        reduced = contract(string, n_sites)
        rebuilt = reduced.prefactor * _dense_product(reduced.terms, n_sites)
        scale = max(1.0, float(np.max(np.abs(original))))
        worst = max(worst, float(np.max(np.abs(rebuilt - original))) / scale)
    return worst


def _random_unitary(rng: np.random.Generator) -> np.ndarray:
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_basis(rng: np.random.Generator, n_sites: int) -> BasisChoice:
    pick = rng.random()
    if pick < 0.3:
        return BasisChoice.z_product()
    if pick < 0.6:
        return BasisChoice.rotated()
    return BasisChoice.rotated([_random_unitary(rng) for _ in range(n_sites)])


def random_weight_equivalence_check(count: int, seed: int,
                                    qubit_budget: int = 12) -> float:
    """Max relative deviation between direct and ancilla-register weights."""
    rng = rng_stream(seed)
    worst = 0.0
    for _ in range(count):
        n_sites = int(rng.integers(2, 6))
        delta = 0.0 if rng.random() < 0.15 else float(rng.uniform(0.1, 1.0))
        spec = ModelSpec(
            n_sites=n_sites,
            delta=delta,
            m_x=float(rng.uniform(0.3, 2.5)),
            m_z=float(rng.uniform(0.3, 2.5)),
            beta=float(rng.uniform(0.1, 2.0)),
        )
        terms = active_terms(spec)
        length = int(rng.integers(0, qubit_budget - n_sites + 1))
        string = [terms[int(rng.integers(len(terms)))] for _ in range(length)]
        alpha = BasisLabel(tuple(int(b) for b in rng.integers(0, 2, size=n_sites)))
        basis = _random_basis(rng, n_sites)
        config = Configuration(alpha=alpha, string=string, weight_value=0.0)
        direct = weight(config, spec, basis)
        register = ancilla_weight(config, spec, basis)
        dev = abs(direct - register) / max(1.0, abs(direct), abs(register))
        worst = max(worst, dev)
    return worst


# ---------------------------------------------------------------------------
# CLI

_INT_KEYS = {"n_sites", "sweeps", "chains", "seed", "plan_alpha", "plan_string",
             "plan_insert", "workers", "n_bins"}
_FLOAT_KEYS = {"delta", "m_x", "m_z", "temperature", "warmup_fraction"}
_STR_KEYS = {"basis"}
_TUPLE_KEYS = {"rotate_sites"}


def parse_config_file(path: Path) -> dict:
    """UTF-8 key=value file; '#' starts a comment; keys match RunConfig fields."""
    values: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _INT_KEYS:
            values[key] = int(value)
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        elif key in _STR_KEYS:
            values[key] = value
        elif key in _TUPLE_KEYS:
            values[key] = tuple(int(v) for v in value.split(",")) if value else None
        else:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return values


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value config file")
    p.add_argument("--sites", dest="n_sites", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--mx", dest="m_x", type=float)
    p.add_argument("--mz", dest="m_z", type=float)
    p.add_argument("--temperature", "-T", type=float)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--warmup-fraction", dest="warmup_fraction", type=float)
    p.add_argument("--chains", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--basis", choices=("z", "rotated"))
    p.add_argument("--rotate-sites", dest="rotate_sites",
                   help="comma-separated sites that get the rotation (rotated basis)")
    p.add_argument("--plan-alpha", dest="plan_alpha", type=int)
    p.add_argument("--plan-string", dest="plan_string", type=int)
    p.add_argument("--plan-insert", dest="plan_insert", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--bins", dest="n_bins", type=int)


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for key in (_INT_KEYS | _FLOAT_KEYS | _STR_KEYS):
        cli = getattr(args, key, None)
        if cli is not None:
            values[key] = cli
    raw_sites = getattr(args, "rotate_sites", None)
    if raw_sites is not None:
        values["rotate_sites"] = tuple(int(v) for v in raw_sites.split(","))
    return RunConfig(**values)


def _cmd_run(args: argparse.Namespace) -> int:
    record = run(_build_run_config(args))
    payload = json.dumps(record.as_dict(), indent=2)
    if args.output:
        Path(args.output).write_text(payload + "\n", encoding="utf-8")
    print(payload)
    return 0


def _cmd_campaign(args: argparse.Namespace) -> int:
    base = _build_run_config(args)
    grid = tuple(float(v) for v in args.grid.split(","))
    spec = CampaignSpec(axis=args.axis, grid=grid, base=base)
    rows = campaign(spec)
    write_campaign_csv(rows, Path(args.csv), spec)
    failures = sum(1 for row in rows if row["error"])
    print(f"wrote {len(rows)} rows to {args.csv} ({failures} failed points)")
    return 0


def _cmd_ed(args: argparse.Namespace) -> int:
    spec = ModelSpec(
        n_sites=args.n_sites,
        delta=args.delta,
        m_x=args.m_x,
        m_z=args.m_z,
        beta=1.0 / args.temperature,
    )
    value = ed.thermal_energy(spec)
    print(f"thermal_energy={value!r}")
    print(f"energy_offset={spec.energy_offset!r}")
    if args.spectrum:
        for ev in ed.spectrum(spec).eigenvalues:
            print(repr(float(ev)))
    return 0


def _cmd_contract_check(args: argparse.Namespace) -> int:
    worst = random_contraction_check(args.count, args.seed,
                                     max_sites=args.max_sites, max_len=args.max_len)
    ok = worst <= args.tolerance
    print(f"contract-check: {args.count} strings, max deviation {worst:.3e} "
          f"({'PASS' if ok else 'FAIL'} at {args.tolerance:g})")
    return 0 if ok else 1


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    worst = random_weight_equivalence_check(args.count, args.seed)
    ok = worst <= args.tolerance
    print(f"oracle-check: {args.count} configurations, max deviation {worst:.3e} "
          f"({'PASS' if ok else 'FAIL'} at {args.tolerance:g})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftsse",
        description="Shifted-term series-expansion Monte Carlo for the anisotropic XY chain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation, JSON result")
    _add_run_options(p_run)
    p_run.add_argument("--output", help="also write the JSON record here")
    p_run.set_defaults(func=_cmd_run)

    p_camp = sub.add_parser("campaign", help="scan one axis, CSV output")
    _add_run_options(p_camp)
    p_camp.add_argument("--axis", required=True, choices=AXES)
    p_camp.add_argument("--grid", required=True,
                        help="comma-separated, strictly increasing values")
    p_camp.add_argument("--csv", required=True, help="output CSV path")
    p_camp.set_defaults(func=_cmd_campaign)

    p_ed = sub.add_parser("ed", help="exact-diagonalization reference")
    p_ed.add_argument("--sites", dest="n_sites", type=int, required=True)
    p_ed.add_argument("--delta", type=float, default=1.0)
    p_ed.add_argument("--mx", dest="m_x", type=float, default=1.0)
    p_ed.add_argument("--mz", dest="m_z", type=float, default=1.0)
    p_ed.add_argument("--temperature", "-T", type=float, default=2.0)
    p_ed.add_argument("--spectrum", action="store_true", help="print all eigenvalues")
    p_ed.set_defaults(func=_cmd_ed)

    p_cc = sub.add_parser("contract-check", help="randomized contraction exactness")
    p_cc.add_argument("--count", type=int, default=1000)
    p_cc.add_argument("--seed", type=int, default=7)
    p_cc.add_argument("--max-sites", type=int, default=4)
    p_cc.add_argument("--max-len", type=int, default=8)
    p_cc.add_argument("--tolerance", type=float, default=1e-10)
    p_cc.set_defaults(func=_cmd_contract_check)

    p_oc = sub.add_parser("oracle-check", help="direct vs ancilla-register weights")
    p_oc.add_argument("--count", type=int, default=500)
    p_oc.add_argument("--seed", type=int, default=11)
    p_oc.add_argument("--tolerance", type=float, default=1e-10)
    p_oc.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

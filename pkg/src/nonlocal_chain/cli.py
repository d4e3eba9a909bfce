"""Command-line front end.

Configuration is a flat ``key = value`` file (``#`` starts a comment) with
repeated ``term = m,sign,magnitude`` lines, or a JSON object when the file
name ends in ``.json``. Tables are written as CSV (first line echoes the
configuration), reports as JSON. Exit codes: 0 success, 1 input error,
2 numerical failure.

Example::

    nonlocal-chain --config configs/bvk_dispersion.cfg
    nonlocal-chain --config configs/gaussian_chain.cfg --command matrix --output row.csv
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chain_model import (
    ChainConfig,
    CharacteristicSpec,
    Density,
    ExplicitTerms,
    GaussianFamily,
    PerParticle,
    Term,
    build_laplacian,
    validate_admissibility,
)
from .continuum import (
    InfiniteLine,
    Periodic,
    Strong,
    classify_nonlocality,
    continuum_dispersion,
    gaussian_kernel_realspace,
    modulus_transform,
    renormalize,
)
from .dynamics import DisplacementState, simulate, stable_time_step
from .errors import AdmissibilityError, InputError, NumericalError
from .inverse import (
    GaussianBenchmark,
    LongWaveData,
    gaussian_critical_points,
    gaussian_dispersion,
    gaussian_limit_regimes,
    reconstruct_dispersion,
    reconstruct_potential_coefficients,
)
from .spectral import dispersion, eigenvalues, mode_wavenumbers, synthesize_laplacian

COMMANDS = ("dispersion", "matrix", "simulate", "kernel", "reconstruct", "gaussian", "validate")
LIST_KEYS = ("term", "longwave")


class ConfigError(InputError):
    pass


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    values: dict[str, str] = field(default_factory=dict)
    lists: dict[str, list[str]] = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def number(self, key, default=None) -> float:
        raw = self.values.get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"missing required key '{key}'")
            return float(default)
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"key '{key}': not a number: {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(f"key '{key}' must be finite, got {raw!r}")
        return value

    def integer(self, key, default=None) -> int:
        value = self.number(key, default)
        if value != int(value):
            raise ConfigError(f"key '{key}' must be an integer, got {self.values[key]!r}")
        return int(value)

    def echo(self) -> str:
        parts = [f"command={self.command}"]
        parts += [f"{k}={v}" for k, v in sorted(self.values.items())]
        for key in LIST_KEYS:
            parts += [f"{key}={v}" for v in self.lists.get(key, [])]
        return "; ".join(parts)


def _normalize(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_normalize(v) for v in value)
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(value).strip()


def parse_config(text: str, json_format: bool = False) -> RunConfig:
    values: dict[str, str] = {}
    lists: dict[str, list[str]] = {k: [] for k in LIST_KEYS}
    if json_format:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        for key, value in data.items():
            if key in LIST_KEYS:
                lists[key] = [_normalize(v) for v in value]
            else:
                values[key] = _normalize(value)
    else:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in LIST_KEYS:
                lists[key].append(value)
            elif key in values:
                raise ConfigError(f"line {lineno}: duplicate key '{key}'")
            else:
                values[key] = value
    command = values.pop("command", "")
    return RunConfig(command, values, lists)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, json_format=path.suffix == ".json")


def _parse_terms(entries: list[str], label: str) -> tuple[Term, ...]:
    terms = []
    for entry in entries:
        fields = [f.strip() for f in entry.split(",")]
        if len(fields) != 3:
            raise ConfigError(f"{label} entry must be 'm,sign,magnitude', got {entry!r}")
        try:
            m, sign, magnitude = int(fields[0]), int(fields[1]), float(fields[2])
        except ValueError:
            raise ConfigError(f"{label} entry not numeric: {entry!r}") from None
        terms.append(Term(m, sign, magnitude))
    return tuple(terms)


def chain_from_config(cfg: RunConfig, default_rho0: float | None = None) -> ChainConfig:
    n = cfg.integer("n", 8)
    h = cfg.number("spacing", 1.0)
    if "mass" in cfg.values and "density" in cfg.values:
        raise ConfigError("give either 'mass' or 'density', not both")
    if "density" in cfg.values:
        mass = Density(cfg.number("density"))
    elif "mass" in cfg.values:
        mass = PerParticle(cfg.number("mass"))
    elif default_rho0 is not None:
        mass = Density(default_rho0)
    else:
        mass = PerParticle(1.0)
    return ChainConfig(n, h, mass)


def spec_from_config(cfg: RunConfig) -> CharacteristicSpec:
    family = cfg.get("family", "terms")
    if family == "gaussian":
        return GaussianFamily(
            cfg.number("c0"), cfg.number("a"), cfg.number("rho0", 1.0),
            cfg.integer("truncation_order", 40),
        )
    if family != "terms":
        raise ConfigError(f"unknown family {family!r} (expected 'terms' or 'gaussian')")
    if not cfg.lists.get("term"):
        raise ConfigError("no 'term = m,sign,magnitude' lines given")
    return ExplicitTerms(_parse_terms(cfg.lists["term"], "term"))


def _chain_and_spec(cfg: RunConfig):
    spec = spec_from_config(cfg)
    rho0 = spec.rho0 if isinstance(spec, GaussianFamily) else None
    return spec, chain_from_config(cfg, default_rho0=rho0)


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError(f"non-finite value {x} in output")
    return format(x, ".17g")


def write_csv(out, cfg: RunConfig, header: list[str], rows) -> None:
    out.write(f"# config: {cfg.echo()}\n")
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join("" if v is None else _fmt(v) for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise NumericalError(f"non-finite value {obj} in output")
        return float(obj)
    return obj


def write_json(out, cfg: RunConfig, payload: dict) -> None:
    document = {"config": cfg.echo(), **payload}
    out.write(json.dumps(_jsonable(document), indent=2, allow_nan=False) + "\n")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_dispersion(cfg, out, tolerance):
    spec, chain = _chain_and_spec(cfg)
    table = dispersion(spec, chain)
    write_csv(out, cfg, ["s", "kappa", "omega_sq", "group_velocity"], table.rows())
    return f"dispersion: {chain.n_particles} modes, max omega^2 = {table.omega_sq.max():.6g}"


def cmd_matrix(cfg, out, tolerance):
    spec, chain = _chain_and_spec(cfg)
    method = cfg.get("method", "direct")
    if method == "direct":
        lap = build_laplacian(spec, chain)
    elif method == "spectral":
        lap = synthesize_laplacian(spec, chain)
    else:
        raise ConfigError(f"unknown matrix method {method!r} (expected 'direct' or 'spectral')")
    eig = eigenvalues(lap)
    fmt = cfg.get("format", "csv")
    if fmt == "csv":
        write_csv(out, cfg, ["j", "first_row", "eigenvalue"],
                  zip(range(lap.n), lap.first_row, eig))
    elif fmt == "json":
        write_json(out, cfg, {"n": lap.n, "mu": chain.mu, "spacing": chain.spacing,
                              "first_row": lap.first_row, "eigenvalues": eig})
    else:
        raise ConfigError(f"unknown format {fmt!r} (expected 'csv' or 'json')")
    return f"matrix: N = {lap.n}, diagonal = {lap.first_row[0]:.6g}"


def _initial_state(cfg: RunConfig, n: int) -> DisplacementState:
    kind = cfg.get("initial", "mode")
    amplitude = cfg.number("amplitude", 1.0)
    p = np.arange(n)
    if kind == "mode":
        s = cfg.integer("mode_index", 1)
        return DisplacementState.at_rest(amplitude * np.cos(2.0 * np.pi * s * p / n))
    if kind == "random":
        rng = np.random.default_rng(cfg.integer("seed", 0))
        return DisplacementState(amplitude * rng.standard_normal(n), amplitude * rng.standard_normal(n))
    if kind == "explicit":
        def vector(key):
            raw = cfg.get(key)
            if raw is None:
                return np.zeros(n)
            try:
                values = np.array([float(x) for x in raw.split(",")])
            except ValueError:
                raise ConfigError(f"key '{key}' must be a comma-separated list of numbers") from None
            if values.size != n:
                raise ConfigError(f"key '{key}' needs {n} values, got {values.size}")
            return values
        return DisplacementState(vector("u0"), vector("v0"))
    raise ConfigError(f"unknown initial condition {kind!r} (expected mode, random or explicit)")


def cmd_simulate(cfg, out, tolerance):
    spec, chain = _chain_and_spec(cfg)
    lap = build_laplacian(spec, chain) if cfg.get("laplacian", "direct") == "direct" else synthesize_laplacian(spec, chain)
    state = _initial_state(cfg, chain.n_particles)
    method = cfg.get("method", "exact")
    if "dt" in cfg.values:
        dt = cfg.number("dt")
    else:
        # 1% inside the Verlet stability bound
        dt = 0.99 * stable_time_step(lap) if method == "verlet" else 0.1 * stable_time_step(lap)
    steps = cfg.integer("steps", 100)
    traj = simulate(state, lap, dt, steps, method=method, record_every=cfg.integer("record_every", max(1, steps // 10)))
    n = chain.n_particles
    header = ["t", "kinetic", "potential", "total", "momentum"] + [f"u{p}" for p in range(n)]
    rows = (
        [t, k, v, k + v, mom, *u]
        for t, k, v, mom, u in zip(traj.times, traj.kinetic, traj.potential, traj.momentum, traj.u)
    )
    write_csv(out, cfg, header, rows)
    e = traj.total
    return f"simulate ({method}): {steps} steps, max |dE|/E0 = {np.max(np.abs(e - e[0])) / abs(e[0]) if e[0] else 0.0:.3e}"


def cmd_kernel(cfg, out, tolerance):
    spec, chain = _chain_and_spec(cfg)
    survival = None
    if "survival" in cfg.values:
        try:
            survival = [int(b) for b in cfg.get("survival").split(",")]
        except ValueError:
            raise ConfigError("survival must be a comma-separated list of 0/1 flags") from None
    boundary_kind = cfg.get("boundary", "infinite")
    if boundary_kind == "infinite":
        boundary = InfiniteLine()
    elif boundary_kind == "periodic":
        boundary = Periodic(chain.length)
    else:
        raise ConfigError(f"unknown boundary {boundary_kind!r} (expected infinite or periodic)")
    ck = renormalize(spec, chain, survival, boundary)
    samples = cfg.integer("samples", 65)
    if samples < 2:
        raise ConfigError("samples must be >= 2")
    if isinstance(boundary, Periodic):
        k = 2.0 * np.pi * np.arange(samples) / boundary.length
    else:
        k = np.linspace(0.0, cfg.number("k_max", 4.0), samples)
    w2 = continuum_dispersion(ck, k)
    modulus = modulus_transform(ck, k)
    header = ["k", "omega_sq", "modulus_transform"]
    columns = [k, w2, modulus]
    if ck.gaussian is not None:
        x_max = cfg.number("x_max", 6.0 * math.sqrt(ck.gaussian.a))
        x = np.linspace(-x_max, x_max, samples)
        period = boundary.length if isinstance(boundary, Periodic) else None
        g = ck.gaussian
        header += ["x", "modulus_kernel", "laplacian_kernel"]
        columns += [
            x,
            gaussian_kernel_realspace(g.c0, g.a, x, period=period),
            gaussian_kernel_realspace(g.c0, g.a, x, laplacian=True, period=period),
        ]
    write_csv(out, cfg, header, zip(*columns))
    cls = classify_nonlocality(ck)
    label = "strong" if isinstance(cls, Strong) else f"weak (max order {cls.max_order})"
    return f"kernel: rho0 = {ck.rho0:.6g}, nonlocality {label}"


def _long_wave_from_config(cfg: RunConfig) -> tuple[LongWaveData, GaussianBenchmark | None]:
    n = cfg.integer("n", 64)
    h = cfg.number("spacing", 1.0)
    if cfg.get("family") == "gaussian":
        c0, a, rho0 = cfg.number("c0"), cfg.number("a"), cfg.number("rho0", 1.0)
        data = LongWaveData.from_gaussian(c0, a, rho0, h, n, cfg.integer("truncation_order", 40))
        return data, GaussianBenchmark.from_material(c0, a, rho0, h)
    if not cfg.lists.get("longwave"):
        raise ConfigError("reconstruct needs 'longwave = m,sign,A' lines or family = gaussian")
    rho0 = cfg.number("rho0", cfg.number("density", 1.0))
    return LongWaveData(rho0, h, n, _parse_terms(cfg.lists["longwave"], "longwave")), None


def cmd_reconstruct(cfg, out, tolerance):
    data, bench = _long_wave_from_config(cfg)
    n = data.n_particles
    s = np.arange(n)
    folded = np.where(s <= n // 2, s, s - n)
    w2 = reconstruct_dispersion(data, folded)
    payload = {
        "n": n,
        "spacing": data.spacing,
        "rho0": data.rho0,
        "dispersion": [
            {"s": int(si), "kappa": float(k), "omega_sq": float(w)}
            for si, k, w in zip(folded, mode_wavenumbers(n), w2)
        ],
        "potential_coefficients": [
            {"order": c.order, "prefactor": c.prefactor}
            for c in reconstruct_potential_coefficients(data)
        ],
    }
    if bench is not None:
        closed = gaussian_dispersion(bench, mode_wavenumbers(n))
        payload["closed_form_max_abs_deviation"] = float(np.max(np.abs(closed - w2)))
    write_json(out, cfg, payload)
    return f"reconstruct: {len(data.terms)} long-wave terms, N = {n}"


def cmd_gaussian(cfg, out, tolerance):
    h = cfg.number("spacing", 1.0)
    if "gamma" in cfg.values:
        gamma = cfg.number("gamma")
        c0, rho0 = cfg.number("c0", 1.0), cfg.number("rho0", 1.0)
        bench = GaussianBenchmark(4.0 * c0 / (h * h * rho0), gamma, h)
    else:
        bench = GaussianBenchmark.from_material(cfg.number("c0"), cfg.number("a"), cfg.number("rho0", 1.0), h)
    crit = gaussian_critical_points(bench)
    regimes = gaussian_limit_regimes(bench, cfg.integer("samples", 4097))
    payload = {
        "has_interior_max": crit.has_interior_max,
        "kappa_star": crit.kappa_star,
        "omega_sq_max": crit.omega_sq_max,
        "gamma": bench.gamma,
        "omega0_sq": bench.omega0_sq,
        "v0": bench.v0,
        "zone_boundary_omega_sq": gaussian_dispersion(bench, math.pi),
        "max_rel_deviation_from_sine_square": regimes.max_rel_deviation_from_sine_square,
        "kappa_star_asymptotic": regimes.kappa_star_asymptotic,
        "omega_sq_max_asymptotic": regimes.omega_sq_max_asymptotic,
        "localized_fraction": regimes.localized_fraction,
    }
    write_json(out, cfg, payload)
    return f"gaussian: gamma = {bench.gamma:.6g}, interior maximum: {crit.has_interior_max}"


def cmd_validate(cfg, out, tolerance):
    spec, chain = _chain_and_spec(cfg)
    report = validate_admissibility(spec, spacing=chain.spacing)
    payload = {
        "admissible": report.ok,
        "min_value": report.min_value,
        "argmin": report.argmin,
        "tolerance": tolerance,
    }
    if not report.ok:
        write_json(out, cfg, payload)
        raise AdmissibilityError(
            f"characteristic function not positive on (0,4]: f({report.argmin:.6g}) = {report.min_value:.6g}"
        )
    direct = build_laplacian(spec, chain)
    spectral = synthesize_laplacian(spec, chain)
    scale = float(np.max(np.abs(direct.first_row)))
    table = dispersion(spec, chain)
    eig = eigenvalues(direct)
    checks = {
        "direct_vs_spectral": float(np.max(np.abs(direct.first_row - spectral.first_row))) / scale,
        "eigenvalues_vs_dispersion": float(np.max(np.abs(eig + chain.mu * table.omega_sq)))
        / float(np.max(np.abs(eig))),
        "symmetry": float(np.max(np.abs(direct.first_row[1:] - direct.first_row[:0:-1]))) / scale,
        "row_sum": abs(float(np.sum(direct.first_row))) / scale,
        "max_eigenvalue": float(np.max(eig)) / scale,
    }
    failed = [name for name, value in checks.items() if value > tolerance]
    payload["checks"] = checks
    payload["passed"] = not failed
    write_json(out, cfg, payload)
    if failed:
        raise NumericalError(f"invariant checks failed: {', '.join(failed)}")
    return "validate: all invariant checks passed"


HANDLERS = {
    "dispersion": cmd_dispersion,
    "matrix": cmd_matrix,
    "simulate": cmd_simulate,
    "kernel": cmd_kernel,
    "reconstruct": cmd_reconstruct,
    "gaussian": cmd_gaussian,
    "validate": cmd_validate,
}


def run(cfg: RunConfig, out, tolerance: float = 1e-9) -> str:
    """Dispatch one command, writing its table/report to ``out``; returns a summary line."""
    if cfg.command not in HANDLERS:
        raise ConfigError(f"unknown command {cfg.command!r}; expected one of {', '.join(COMMANDS)}")
    return HANDLERS[cfg.command](cfg, out, tolerance)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocal-chain",
        description="Nonlocal periodic harmonic chains: dispersion, matrices, dynamics, kernels, reconstruction.",
    )
    parser.add_argument("--config", required=True, help="key = value config file (or .json)")
    parser.add_argument("--output", help="output file (default: standard output)")
    parser.add_argument("--command", choices=COMMANDS, help="override the config's command")
    parser.add_argument("--tolerance", type=float, default=1e-9, help="relative tolerance for validate")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command:
            cfg.command = args.command
        buffer = io.StringIO()
        summary = run(cfg, buffer, args.tolerance)
    except NumericalError as exc:
        _emit_partial(args.output, locals().get("buffer"))
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # InputError and its subclasses land here too
        _emit_partial(args.output, locals().get("buffer"))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(args.output, buffer.getvalue())
    print(summary, file=sys.stderr)
    return 0


def _emit_partial(path, buffer) -> None:
    # validate writes its report before failing; other commands write nothing
    if buffer is not None and buffer.getvalue():
        _emit(path, buffer.getvalue())


def _emit(path, text: str) -> None:
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())

"""Batch experiment runner.

Subcommands: ft (closed form + numeric estimate side by side), sweep (closed
forms over a one- or two-axis grid), tpm (protocol run with matched-partner
comparison), entanglement (closed form and optional purity oracle over a
correlation grid), bk-scan (deviation and sensitivity over mass ratios).

Configs are flat key=value text with dotted keys; any key can be overridden
with repeated --set flags.  Data outputs are deterministic for a given config
and seed (UTF-8, LF, 17 significant digits); timestamps and wall-clock live
in a sidecar .meta file next to --out, never in the data.  Exit codes:
0 success (a diverging average is data, not failure), 2 config error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bk_limit import FAMILIES, bk_scan
from .closed_forms import ft_classical, ft_quantum, jensen_bound, xi_surface
from .entanglement import entanglement_closed, entanglement_limit, purity_oracle
from .estimators import QuadratureConfig, estimate_mc, estimate_quadrature
from .model import ModelParams, ProcessInterval
from .states_classical import (
    ClassicalMomentumCorrelated,
    ClassicalThermalGaussian,
    ClassicalThermalThermal,
    sample,
)
from .states_quantum import EntangledPair, states_from_params
from .tpm import ks_critical, ks_statistic, run_tpm

__all__ = ["ConfigError", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


class ConfigError(Exception):
    """Bad or missing configuration; carries the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


# ---------------------------------------------------------------- config ---

def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def load_config(path: str | None, sets: list[str]) -> dict[str, str]:
    cfg: dict[str, str] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                cfg = parse_config_text(fh.read(), source=path)
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc}") from exc
    for item in sets:
        if "=" not in item:
            raise ConfigError("--set", f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _get_float(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(key, "required")
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(key, f"not a number: {cfg[key]!r}") from exc


def _get_int(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(key, "required")
        return default
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(key, f"not an integer: {cfg[key]!r}") from exc


def _get_bool(cfg, key, default=False):
    if key not in cfg:
        return default
    value = cfg[key].lower()
    if value in ("true", "1", "yes", "on"):
        return True
    if value in ("false", "0", "no", "off"):
        return False
    raise ConfigError(key, f"not a boolean: {cfg[key]!r}")


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.17g}"


def build_params(cfg) -> ModelParams:
    kwargs = dict(
        m1=_get_float(cfg, "model.m1"),
        m2=_get_float(cfg, "model.m2"),
        k=_get_float(cfg, "model.k", 1.0),
        beta1=_get_float(cfg, "model.beta1", 1.0),
        hbar=_get_float(cfg, "model.hbar", 1.0),
    )
    try:
        return ModelParams(**kwargs)
    except ValueError as exc:
        raise ConfigError("model.*", str(exc)) from exc


def build_interval(cfg) -> ProcessInterval:
    if "process.t" in cfg and "process.v" in cfg:
        raise ConfigError("process.t", "give either process.v or process.t, not both")
    try:
        if "process.t" in cfg:
            return ProcessInterval(t=_get_float(cfg, "process.t"))
        return ProcessInterval(v=_get_int(cfg, "process.v", 1))
    except ValueError as exc:
        raise ConfigError("process.*", str(exc)) from exc


_STATE_KEYS = {
    ("classical", "tg"): ("sigma2", "x2bar", "p2bar", "x1_width"),
    ("classical", "tt"): ("delta2", "x1_width", "x2_width"),
    ("classical", "corr"): ("c", "x1_width", "x2_width"),
    ("quantum", "tg"): ("sigma1", "sigma2", "x2bar", "p2bar"),
    ("quantum", "tt"): ("sigma1", "sigma2", "delta2"),
    ("quantum", "mom_corr"): ("sigma", "c"),
    ("quantum", "superpos"): ("sigma1", "sigma2", "dx", "x2bar", "p2bar"),
    ("quantum", "entangled"): ("sigma1", "sigma2", "corr"),
    ("quantum", "pos_corr"): ("sigma1", "sigma2", "corr"),
}

_REQUIRED_STATE_KEYS = {
    ("classical", "tg"): ("sigma2",),
    ("classical", "tt"): ("delta2",),
    ("classical", "corr"): ("c",),
    ("quantum", "tg"): ("sigma1", "sigma2"),
    ("quantum", "tt"): ("sigma1", "sigma2", "delta2"),
    ("quantum", "mom_corr"): ("sigma", "c"),
    ("quantum", "superpos"): ("sigma1", "sigma2", "dx"),
    ("quantum", "entangled"): ("sigma1", "sigma2", "corr"),
    ("quantum", "pos_corr"): ("sigma1", "sigma2", "corr"),
}


def build_state(cfg, params: ModelParams, variant: str | None = None):
    kind = cfg.get("state.kind", "classical")
    if kind not in ("classical", "quantum"):
        raise ConfigError("state.kind", f"must be classical or quantum, got {kind!r}")
    if variant is None:
        variant = cfg.get("state.variant")
        if variant is None:
            raise ConfigError("state.variant", "required")
    if (kind, variant) not in _STATE_KEYS:
        raise ConfigError("state.variant", f"unknown variant {variant!r} for kind {kind!r}")
    for key in _REQUIRED_STATE_KEYS[(kind, variant)]:
        if f"state.{key}" not in cfg:
            raise ConfigError(f"state.{key}", f"required for {kind}/{variant}")
    kwargs = {
        key: _get_float(cfg, f"state.{key}")
        for key in _STATE_KEYS[(kind, variant)]
        if f"state.{key}" in cfg
    }
    try:
        if kind == "classical":
            builder = {
                "tg": ClassicalThermalGaussian,
                "tt": ClassicalThermalThermal,
                "corr": ClassicalMomentumCorrelated,
            }[variant]
            return builder.from_params(params, **kwargs)
        return states_from_params(params, variant, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"state.* ({kind}/{variant})", str(exc)) from exc


def experiment_id(command: str, cfg: dict[str, str]) -> str:
    canonical = command + "\n" + "\n".join(f"{k} = {cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


# ---------------------------------------------------------------- output ---

class _Sink:
    """Deterministic data writer plus a non-deterministic .meta sidecar."""

    def __init__(self, out_path: str | None):
        self.out_path = out_path
        self.lines: list[str] = []
        self.meta: list[str] = []
        self.started = time.perf_counter()

    def write(self, line: str) -> None:
        self.lines.append(line)

    def note(self, key: str, value: str) -> None:
        self.meta.append(f"{key} = {value}")

    def flush(self) -> int:
        data = "\n".join(self.lines) + "\n"
        if self.out_path is None:
            sys.stdout.write(data)
            return EXIT_OK
        try:
            with open(self.out_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(data)
            meta = [
                f"flucto.version = {__version__}",
                f"created_utc = {datetime.now(timezone.utc).isoformat()}",
                f"wall_clock_s = {fmt(time.perf_counter() - self.started)}",
                *self.meta,
            ]
            with open(self.out_path + ".meta", "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(meta) + "\n")
        except OSError as exc:
            print(f"error: cannot write {self.out_path}: {exc}", file=sys.stderr)
            return EXIT_IO
        return EXIT_OK


def _snapshot_lines(cfg: dict[str, str]) -> list[str]:
    return [f"{key} = {cfg[key]}" for key in sorted(cfg)]


# ------------------------------------------------------------------- ft ---

def cmd_ft(cfg: dict[str, str], out_path: str | None, threads: int) -> int:
    params = build_params(cfg)
    interval = build_interval(cfg)
    kind = cfg.get("state.kind", "classical")
    variants = [v.strip() for v in cfg.get("state.variant", "").split(",") if v.strip()]
    if not variants:
        raise ConfigError("state.variant", "required")
    n = _get_int(cfg, "mc.n", 10**5)
    if n < 10**4:
        raise ConfigError("mc.n", "must be at least 1e4")
    seed = _get_int(cfg, "mc.seed", 0)
    chunk = _get_int(cfg, "mc.chunk", 1 << 16)
    try:
        quad = QuadratureConfig(
            radius=_get_float(cfg, "quad.radius", 12.0),
            nodes=_get_int(cfg, "quad.nodes", 257),
            levels=_get_int(cfg, "quad.levels", 2),
        )
    except ValueError as exc:
        raise ConfigError("quad.*", str(exc)) from exc
    sink = _Sink(out_path)
    for index, variant in enumerate(variants, start=1):
        state = build_state(cfg, params, variant)
        closed = ft_classical(state, params) if kind == "classical" else ft_quantum(state, params)
        started = time.perf_counter()
        if kind == "classical":
            numeric = estimate_mc(state, params, interval, n=n, seed=seed,
                                  threads=threads, chunk=chunk)
        else:
            if not interval.is_half_period_multiple:
                raise ConfigError("process.t", "quantum work needs an odd half-period interval")
            numeric = estimate_quadrature(state, params, quad, on_divergence="flag")
        elapsed = time.perf_counter() - started
        bound = jensen_bound(closed, params.beta1) if closed.valid else math.nan
        block_id = experiment_id("ft", cfg) + f"-{index}"
        sink.write(f"[result {block_id}]")
        sink.write(f"state.kind = {kind}")
        sink.write(f"state.variant = {variant}")
        for line in _snapshot_lines(cfg):
            sink.write(f"config.{line}")
        sink.write(f"closed.value = {fmt(closed.value)}")
        sink.write(f"closed.valid = {fmt(closed.valid)}")
        sink.write(f"closed.condition_margin = {fmt(closed.condition_margin)}")
        sink.write(f"closed.condition = {closed.condition}")
        for key in sorted(closed.helpers):
            sink.write(f"closed.helper.{key} = {fmt(closed.helpers[key])}")
        sink.write(f"numeric.method = {numeric.method}")
        sink.write(f"numeric.value = {fmt(numeric.value)}")
        sink.write(f"numeric.error = {fmt(numeric.error)}")
        sink.write(f"numeric.n = {numeric.n}")
        sink.write(f"numeric.diverged = {fmt(numeric.diverged)}")
        if numeric.ess is not None:
            sink.write(f"numeric.ess = {fmt(numeric.ess)}")
        sink.write(f"jensen.bound = {fmt(bound)}")
        sink.write("")
        sink.note(f"wall_clock_s.{block_id}", fmt(elapsed))
    if "mc.dump" in cfg:
        if kind != "classical":
            raise ConfigError("mc.dump", "sample dumps apply to classical states only")
        _dump_samples(cfg, params, variants[0], n, seed, chunk)
    return sink.flush()


def _dump_samples(cfg, params, variant, n, seed, chunk) -> None:
    batch = sample(build_state(cfg, params, variant), seed, n, chunk)
    with open(cfg["mc.dump"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x1,p1,x2,p2\n")
        for row in batch.points:
            fh.write(",".join(fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------- sweep ---

def _axis_values(cfg, axis: str) -> np.ndarray:
    values_key, linspace_key = f"{axis}.values", f"{axis}.linspace"
    if values_key in cfg:
        try:
            return np.array([float(v) for v in cfg[values_key].split(",")])
        except ValueError as exc:
            raise ConfigError(values_key, f"bad number list: {cfg[values_key]!r}") from exc
    if linspace_key in cfg:
        parts = cfg[linspace_key].split(",")
        if len(parts) != 3:
            raise ConfigError(linspace_key, "expected start,stop,count")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(linspace_key, f"bad linspace spec: {cfg[linspace_key]!r}") from exc
        if count < 1:
            raise ConfigError(linspace_key, "count must be >= 1")
        return np.linspace(start, stop, count)
    raise ConfigError(values_key, f"axis {axis} needs .values or .linspace")


def _sweep_axes(cfg) -> list[tuple[str, np.ndarray]]:
    axes = []
    for axis in ("sweep.axis1", "sweep.axis2"):
        if axis in cfg:
            axes.append((cfg[axis], _axis_values(cfg, axis)))
    if not axes:
        raise ConfigError("sweep.axis1", "at least one sweep axis is required")
    return axes


def cmd_sweep(cfg: dict[str, str], out_path: str | None, threads: int) -> int:
    quantity = cfg.get("sweep.quantity", "ft")
    axes = _sweep_axes(cfg)
    sink = _Sink(out_path)
    if quantity == "xi":
        names = [name for name, _ in axes]
        if sorted(names) != ["eta", "mass_ratio"]:
            raise ConfigError("sweep.axis1", "xi sweeps need axes 'eta' and 'mass_ratio'")
        gamma = _get_float(cfg, "xi.gamma")
        eta = dict(axes)["eta"]
        ratio = dict(axes)["mass_ratio"]
        try:
            surface = xi_surface(gamma, eta, ratio)
        except ValueError as exc:
            raise ConfigError("xi.gamma", str(exc)) from exc
        sink.write("eta,mass_ratio,attenuation")
        for i, e in enumerate(eta):
            for j, r in enumerate(ratio):
                sink.write(f"{fmt(e)},{fmt(r)},{fmt(surface[i, j])}")
        return sink.flush()

    if quantity == "bk":
        if len(axes) != 1 or axes[0][0] != "mass_ratio":
            raise ConfigError("sweep.axis1", "bk sweeps take the single axis 'mass_ratio'")
        return _emit_bk(cfg, axes[0][1], sink)

    if quantity != "ft":
        raise ConfigError("sweep.quantity", f"unknown quantity {cfg['sweep.quantity']!r}")

    if len(axes) > 2:
        raise ConfigError("sweep.axis2", "at most two axes")
    grids = [values for _, values in axes]
    keys = [name for name, _ in axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    cells = np.stack([m.ravel() for m in mesh], axis=-1)

    def evaluate(cell):
        local = dict(cfg)
        for key, value in zip(keys, cell):
            local[key] = fmt(float(value))
        params = build_params(local)
        state = build_state(local, params)
        kind = local.get("state.kind", "classical")
        closed = ft_classical(state, params) if kind == "classical" else ft_quantum(state, params)
        bound = jensen_bound(closed, params.beta1) if closed.valid else math.nan
        return cell, closed, bound

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(evaluate, cells))  # grid order regardless of completion
    else:
        rows = [evaluate(cell) for cell in cells]
    helper_keys = sorted(rows[0][1].helpers) if rows else []
    if not rows:
        raise ConfigError("sweep.axis1", "empty grid")
    header = keys + ["value", "valid", "condition_margin", "jensen_bound"] + helper_keys
    sink.write(",".join(header))
    for cell, closed, bound in rows:
        fields = [fmt(float(v)) for v in cell]
        fields += [fmt(closed.value), fmt(closed.valid), fmt(closed.condition_margin), fmt(bound)]
        fields += [fmt(closed.helpers.get(k, math.nan)) for k in helper_keys]
        sink.write(",".join(fields))
    return sink.flush()


def _bk_state_kwargs(cfg, family: str) -> dict[str, float]:
    kind, variant = ("classical", family.removeprefix("classical_")) if family.startswith(
        "classical_"
    ) else ("quantum", family.removeprefix("quantum_"))
    allowed = _STATE_KEYS.get((kind, variant))
    if allowed is None:
        raise ConfigError("bk.family", f"unknown family {family!r}; expected one of {FAMILIES}")
    return {
        key: _get_float(cfg, f"state.{key}") for key in allowed if f"state.{key}" in cfg
    }


def _emit_bk(cfg, ratios: np.ndarray, sink: _Sink) -> int:
    family = cfg.get("bk.family")
    if family is None:
        raise ConfigError("bk.family", "required")
    params = build_params(cfg)
    kwargs = _bk_state_kwargs(cfg, family)
    try:
        report = bk_scan(family, ratios, params, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError("bk.*", str(exc)) from exc
    sink.write("mass_ratio,deviation,sensitivity,valid")
    for i in range(len(report.ratios)):
        sink.write(
            f"{fmt(report.ratios[i])},{fmt(report.deviations[i])},"
            f"{fmt(report.sensitivities[i])},{fmt(bool(report.valid[i]))}"
        )
    return sink.flush()


def cmd_bk_scan(cfg: dict[str, str], out_path: str | None, threads: int) -> int:
    sink = _Sink(out_path)
    if "sweep.axis1" in cfg:
        if cfg["sweep.axis1"] != "mass_ratio":
            raise ConfigError("sweep.axis1", "bk-scan takes the single axis 'mass_ratio'")
        ratios = _axis_values(cfg, "sweep.axis1")
    else:
        ratios = _axis_values(cfg, "bk.ratios")
    return _emit_bk(cfg, ratios, sink)


# ------------------------------------------------------------------ tpm ---

def cmd_tpm(cfg: dict[str, str], out_path: str | None, threads: int) -> int:
    params = build_params(cfg)
    if cfg.get("state.kind", "quantum") != "quantum":
        raise ConfigError("state.kind", "tpm needs a quantum state")
    variant = cfg.get("state.variant")
    if variant not in ("entangled", "pos_corr"):
        raise ConfigError("state.variant", "tpm supports 'entangled' and 'pos_corr' only")
    n = _get_int(cfg, "tpm.n", 10**5)
    if n < 1:
        raise ConfigError("tpm.n", "must be >= 1")
    seed = _get_int(cfg, "tpm.seed", 0)
    partner_seed = _get_int(cfg, "tpm.partner_seed", seed)
    v = _get_int(cfg, "tpm.v", 1)
    state = build_state(cfg, params, variant)
    partner_variant = "pos_corr" if variant == "entangled" else "entangled"
    partner = build_state(cfg, params, partner_variant)
    try:
        run = run_tpm(state, params, v=v, n=n, seed=seed)
        partner_run = run_tpm(partner, params, v=v, n=n, seed=partner_seed)
    except ValueError as exc:
        raise ConfigError("tpm.*", str(exc)) from exc
    distance = ks_statistic(run.records[:, 2], partner_run.records[:, 2])
    critical = ks_critical(n, n, alpha=0.01)
    exact = ft_quantum(
        state if isinstance(state, EntangledPair) else partner, params
    )
    gap = abs(run.exp_average.value - exact.value)
    gap_sigma = gap / run.exp_average.error if run.exp_average.error > 0 else math.inf

    sink = _Sink(out_path)
    block_id = experiment_id("tpm", cfg)
    sink.write(f"[tpm {block_id}]")
    for line in _snapshot_lines(cfg):
        sink.write(f"config.{line}")
    sink.write(f"state.variant = {variant}")
    sink.write(f"partner.variant = {partner_variant}")
    sink.write(f"exp_average.value = {fmt(run.exp_average.value)}")
    sink.write(f"exp_average.stderr = {fmt(run.exp_average.error)}")
    sink.write(f"exp_average.ess = {fmt(run.exp_average.ess)}")
    sink.write(f"partner.exp_average.value = {fmt(partner_run.exp_average.value)}")
    sink.write(f"partner.exp_average.stderr = {fmt(partner_run.exp_average.error)}")
    sink.write(f"ks.distance = {fmt(distance)}")
    sink.write(f"ks.critical_1pct = {fmt(critical)}")
    sink.write(f"ks.pass_1pct = {fmt(distance <= critical)}")
    sink.write(f"exact.value = {fmt(exact.value)}")
    sink.write(f"exact.gap = {fmt(gap)}")
    sink.write(f"exact.gap_sigma = {fmt(gap_sigma)}")
    return sink.flush()


# -------------------------------------------------------- entanglement ---

def cmd_entanglement(cfg: dict[str, str], out_path: str | None, threads: int) -> int:
    params = build_params(cfg)
    sigma1 = _get_float(cfg, "state.sigma1")
    sigma2 = _get_float(cfg, "state.sigma2")
    eps = sigma1 / params.delta1
    corr_grid = _axis_values(cfg, "ent.corr")
    with_oracle = _get_bool(cfg, "ent.oracle", False)
    limit = entanglement_limit(eps)
    sink = _Sink(out_path)
    header = "corr,theta,closed,rescaled" + (",oracle" if with_oracle else "")
    sink.write(header)
    for corr in corr_grid:
        if corr < 0:
            raise ConfigError("ent.corr", "correlations must be >= 0")
        closed = entanglement_closed(float(corr), eps, sigma1, sigma2, params.hbar)
        theta = math.inf if corr == 0 else params.hbar / (2 * corr * sigma1 * sigma2)
        fields = [fmt(float(corr)), fmt(theta), fmt(closed), fmt(closed / limit)]
        if with_oracle:
            state = EntangledPair(params.delta1, sigma1, sigma2, float(corr), params.hbar)
            fields.append(fmt(purity_oracle(state)))
        sink.write(",".join(fields))
    return sink.flush()


# ----------------------------------------------------------------- main ---

def _resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("FLUCTO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError("FLUCTO_THREADS", f"not an integer: {env!r}") from exc
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flucto",
        description="Work fluctuation relations of the two-particle elastic system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ft", "closed form and numeric estimate for one or more states"),
        ("sweep", "closed-form grid sweep to CSV (quantity: ft, xi or bk)"),
        ("tpm", "two-point measurement run with matched-partner comparison"),
        ("entanglement", "entanglement over a correlation grid to CSV"),
        ("bk-scan", "deviation/sensitivity scan over mass ratios to CSV"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", metavar="PATH", default=None)
        cmd.add_argument("--set", metavar="KEY=VALUE", action="append", default=[])
        cmd.add_argument("--out", metavar="PATH", default=None)
        cmd.add_argument("--seed", metavar="N", type=int, default=None)
        cmd.add_argument("--threads", metavar="N", type=int, default=None)
    return parser


_DISPATCH = {
    "ft": cmd_ft,
    "sweep": cmd_sweep,
    "tpm": cmd_tpm,
    "entanglement": cmd_entanglement,
    "bk-scan": cmd_bk_scan,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        if args.seed is not None:
            cfg["mc.seed"] = str(args.seed)
            cfg["tpm.seed"] = str(args.seed)
        threads = _resolve_threads(args.threads)
        return _DISPATCH[args.command](cfg, args.out, threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

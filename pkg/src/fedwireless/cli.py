"""Command-line harness: seeded experiments in, CSV trajectories out.

Three subcommands share one flat key-value config format (``key = value``
lines, ``#`` comments, flags override file values):

* ``simulate`` — federated training on a synthetic or fixture dataset;
  emits one row per round: ``round,policy,K,selected,test_accuracy,
  mean_loss,mean_q,mean_bits`` (``selected`` is semicolon-joined).
* ``bound``    — a single convergence-bound trajectory; emits
  ``series,round,rho_mean,dist_bound,loss_gap_bound``.
* ``sweep``    — the bound averaged over channel replicas for each value of
  K or tau; same schema, one series per value.

In bound/sweep rows, ``rho_mean`` at round t is the replica-mean sparsity
fraction applied in the transition into round t (row 0 carries 0.0).
Exit codes: 0 success, 2 config error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import bound as bound_mod
from . import seeding
from .datasets import load_fixture, make_blobs
from .fedsim import (
    NumericalDivergenceError,
    TrainConfig,
    partition_iid,
    partition_noniid,
    run_experiment,
)
from .losses import SoftmaxRegression, TanhMLP
from .rates import parse_rate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_POLICIES = ("bc", "bn2", "bc-bn2", "bn2-c", "random")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    """Flat, file-serializable description of one experiment."""

    mode: str
    seed: int = 0
    out: str = "out.csv"
    jobs: int = 1
    replicas: int = 1
    # Channel / budget.
    M: int | None = None
    K: int | None = None
    Kc: int | None = None
    n_slots: float | None = None
    pbar: float = 1.0
    noise_var: float = 1.0
    # Bound parameters.
    d: int | None = None
    T: int | None = None
    tau: int | None = None
    mu: float | None = None
    L: float | None = None
    G: float | None = None
    Gamma: float | None = None
    init_dist_sq: float | None = None
    eta: str | None = None
    fixed_rho: float | None = None
    axis: str | None = None
    values: tuple[int, ...] | None = None
    # Training.
    policy: str | None = None
    batch: int | None = None
    B: int | None = None
    partition: str | None = None
    n_features: int | None = None
    n_classes: int | None = None
    hidden: int = 0
    train_size: int | None = None
    test_size: int = 2000
    sep: float = 3.0
    optimizer: str = "sgd"
    dataset: str = "synthetic"

    def emit(self) -> str:
        """Config-file text that parses back to this exact config."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "values":
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}

_INT_KEYS = {
    "seed", "jobs", "replicas", "M", "K", "Kc", "d", "T", "tau", "batch",
    "B", "n_features", "n_classes", "hidden", "train_size", "test_size",
}
_FLOAT_KEYS = {
    "n_slots", "pbar", "noise_var", "mu", "L", "G", "Gamma", "init_dist_sq",
    "fixed_rho", "sep",
}
_STR_KEYS = {"mode", "out", "eta", "axis", "policy", "partition", "optimizer", "dataset"}


def _convert(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "values":
            return tuple(int(p.strip()) for p in raw.split(",") if p.strip())
        if key in _STR_KEYS:
            return raw
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse value {raw!r}") from None
    raise ConfigError(f"unknown config key {key!r}")


def _read_config_file(path: str | Path) -> dict:
    out = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        out[key] = _convert(key, raw)
    return out


def _require(cfg: ExperimentConfig, *keys: str) -> None:
    for key in keys:
        if getattr(cfg, key) is None:
            raise ConfigError(f"{cfg.mode} mode requires config key {key!r}")


def validate_config(cfg: ExperimentConfig) -> None:
    """Check cross-field invariants, naming the offending key on failure."""
    if cfg.mode not in ("simulate", "bound", "sweep"):
        raise ConfigError(f"mode must be simulate, bound or sweep, got {cfg.mode!r}")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if cfg.replicas < 1:
        raise ConfigError("replicas must be >= 1")

    if cfg.mode in ("bound", "sweep"):
        _require(cfg, "M", "K", "n_slots", "d", "T", "tau", "mu", "L", "G",
                 "Gamma", "init_dist_sq", "eta")
        if cfg.mode == "sweep":
            _require(cfg, "axis", "values")
            if cfg.axis not in ("K", "tau"):
                raise ConfigError(f"axis must be 'K' or 'tau', got {cfg.axis!r}")
            if not cfg.values:
                raise ConfigError("values must list at least one integer")
        try:
            params = _bound_params(cfg)
            if cfg.mode == "sweep":
                for v in cfg.values:
                    bound_mod.series_params(params, cfg.axis, v)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        _require(cfg, "M", "K", "T", "tau", "batch", "eta", "n_slots",
                 "policy", "B", "partition", "n_features", "n_classes")
        if cfg.replicas != 1:
            raise ConfigError("simulate mode runs a single trajectory; replicas must be 1")
        if cfg.policy not in _POLICIES:
            raise ConfigError(f"policy must be one of {_POLICIES}, got {cfg.policy!r}")
        if cfg.policy == "bc-bn2" and cfg.Kc is None:
            raise ConfigError("policy bc-bn2 requires config key 'Kc'")
        if cfg.partition not in ("iid", "noniid"):
            raise ConfigError(f"partition must be 'iid' or 'noniid', got {cfg.partition!r}")
        if cfg.B < 1:
            raise ConfigError("B must be >= 1")
        if cfg.partition == "noniid" and cfg.B % 2 != 0:
            raise ConfigError("noniid partitioning requires an even B")
        if cfg.n_features < 1 or cfg.n_classes < 2:
            raise ConfigError("need n_features >= 1 and n_classes >= 2")
        if cfg.partition == "noniid" and cfg.n_classes < 2:
            raise ConfigError("noniid partitioning needs n_classes >= 2")
        if cfg.hidden < 0:
            raise ConfigError("hidden must be >= 0 (0 selects softmax regression)")
        if cfg.test_size < 1:
            raise ConfigError("test_size must be >= 1")
        if cfg.train_size is not None and cfg.train_size < 1:
            raise ConfigError("train_size must be >= 1")
        try:
            _train_config(cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def parse_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a validated config from a file and/or override values."""
    data = _read_config_file(path) if path is not None else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            data[key] = value
    unknown = set(data) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    if "mode" not in data:
        raise ConfigError("config must define 'mode' (simulate, bound or sweep)")
    cfg = ExperimentConfig(**data)
    validate_config(cfg)
    return cfg


def _bound_params(cfg: ExperimentConfig) -> bound_mod.BoundParams:
    return bound_mod.BoundParams(
        mu=cfg.mu, L=cfg.L, tau=cfg.tau, G=cfg.G, Gamma=cfg.Gamma,
        M=cfg.M, K=cfg.K, T=cfg.T,
        lr_schedule=parse_rate(cfg.eta), init_dist_sq=cfg.init_dist_sq,
    )


def _train_config(cfg: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        M=cfg.M, K=cfg.K, T=cfg.T, tau=cfg.tau, batch=cfg.batch,
        lr_schedule=parse_rate(cfg.eta), seed=cfg.seed, policy=cfg.policy,
        Kc=cfg.Kc, n_slots=cfg.n_slots, pbar=cfg.pbar,
        noise_var=cfg.noise_var, optimizer=cfg.optimizer,
    )


def _format(value: float) -> str:
    return repr(float(value))


def _write_rows(path: str, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _bound_csv_rows(series_list):
    for s in series_list:
        label = f"{s.axis}={s.value}"
        for t in range(s.dist_bound.size):
            rho = 0.0 if t == 0 else s.rho_mean[t - 1]
            yield (label, str(t), _format(rho), _format(s.dist_bound[t]),
                   _format(s.loss_gap[t]))


def _run_series(cfg: ExperimentConfig, axis: str, values) -> list:
    params = _bound_params(cfg)
    trajectories = None
    if cfg.fixed_rho is None and cfg.jobs > 1:
        cells = [(i, r) for i in range(len(values)) for r in range(cfg.replicas)]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = pool.map(
                _replica_cell,
                [(params, axis, values[i], cfg, i, r) for i, r in cells],
            )
            trajectories = dict(zip(cells, results))
    return bound_mod.sweep(
        params, axis, values,
        d=cfg.d, n=cfg.n_slots, pbar=cfg.pbar, noise_var=cfg.noise_var,
        replicas=cfg.replicas, seed=cfg.seed, fixed_rho=cfg.fixed_rho,
        trajectories=trajectories,
    )


def _replica_cell(args):
    params, axis, value, cfg, i, r = args
    return bound_mod.replica_trajectory(
        params, axis, value, cfg.d, cfg.n_slots, cfg.pbar, cfg.noise_var,
        cfg.seed, i, r,
    )


def _cmd_bound(cfg: ExperimentConfig) -> str:
    series = _run_series(cfg, "K", [cfg.K])
    _write_rows(cfg.out, "series,round,rho_mean,dist_bound,loss_gap_bound",
                _bound_csv_rows(series))
    return f"final loss_gap_bound K={cfg.K}: {series[0].loss_gap[-1]:.6g}"


def _cmd_sweep(cfg: ExperimentConfig) -> str:
    series = _run_series(cfg, cfg.axis, list(cfg.values))
    _write_rows(cfg.out, "series,round,rho_mean,dist_bound,loss_gap_bound",
                _bound_csv_rows(series))
    best = min(series, key=lambda s: s.loss_gap[-1])
    return (
        f"{len(series)} series; best final loss_gap_bound: "
        f"{best.axis}={best.value} ({best.loss_gap[-1]:.6g})"
    )


def _make_dataset(cfg: ExperimentConfig):
    if cfg.dataset == "synthetic":
        rng = seeding.stream(cfg.seed, seeding.PARTITION, 0)
        train_size = cfg.train_size if cfg.train_size is not None else 4 * cfg.B
        X, y = make_blobs(train_size + cfg.test_size, cfg.n_features,
                          cfg.n_classes, rng, sep=cfg.sep)
        return (X[: train_size], y[: train_size]), (X[train_size:], y[train_size:])
    X, y, n_classes = load_fixture(cfg.dataset)
    if n_classes != cfg.n_classes or X.shape[1] != cfg.n_features:
        raise ConfigError(
            f"dataset {cfg.dataset!r} has {X.shape[1]} features / {n_classes} "
            f"classes; config says n_features={cfg.n_features}, n_classes={cfg.n_classes}"
        )
    if X.shape[0] < 2:
        raise ConfigError(f"dataset {cfg.dataset!r} needs at least 2 samples")
    n_test = max(1, min(cfg.test_size, X.shape[0] // 5))
    return (X[:-n_test], y[:-n_test]), (X[-n_test:], y[-n_test:])


def _cmd_simulate(cfg: ExperimentConfig) -> str:
    tc = _train_config(cfg)
    (X, y), test_set = _make_dataset(cfg)
    prng = seeding.stream(cfg.seed, seeding.PARTITION, 1)
    if cfg.partition == "iid":
        parts = partition_iid(X, y, cfg.M, cfg.B, prng)
    else:
        parts = partition_noniid(X, y, cfg.M, cfg.B, prng)
    if cfg.hidden > 0:
        model = TanhMLP(cfg.n_features, cfg.hidden, cfg.n_classes)
    else:
        model = SoftmaxRegression(cfg.n_features, cfg.n_classes)
    _, records = run_experiment(tc, parts, test_set, model)

    rows = (
        (
            str(rec.metrics.round),
            cfg.policy,
            str(cfg.K),
            ";".join(str(m) for m in rec.metrics.selected),
            _format(rec.test_accuracy),
            _format(rec.mean_loss),
            _format(rec.metrics.mean_q),
            _format(rec.metrics.mean_bits),
        )
        for rec in records
    )
    _write_rows(cfg.out, "round,policy,K,selected,test_accuracy,mean_loss,mean_q,mean_bits", rows)
    last = records[-1] if records else None
    if last is None:
        return "no rounds run"
    return f"final test_accuracy={last.test_accuracy:.4f} mean_loss={last.mean_loss:.6g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedwireless",
        description="Federated learning over a fading uplink: simulate, bound, sweep.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("simulate", "bound", "sweep"):
        p = sub.add_parser(mode)
        p.add_argument("--config", type=str, default=None, help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--policy", choices=_POLICIES, default=None)
        p.add_argument("--K", type=int, default=None)
        p.add_argument("--Kc", type=int, default=None)
        p.add_argument("--replicas", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "mode": args.mode,
        "seed": args.seed,
        "out": args.out,
        "jobs": args.jobs,
        "policy": args.policy,
        "K": args.K,
        "Kc": args.Kc,
        "replicas": args.replicas,
    }
    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if cfg.mode == "simulate":
            summary = _cmd_simulate(cfg)
        elif cfg.mode == "bound":
            summary = _cmd_bound(cfg)
        else:
            summary = _cmd_sweep(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalDivergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

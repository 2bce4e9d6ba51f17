"""
Parameter sweeps producing SER tables.

A sweep covers the cartesian product of N, K, Nr, schemes and SNR
values. For each (N, K, Nr) group and channel realization the codebooks
of all schemes are designed once and evaluated at every SNR with shared
noise samples. Realizations run in worker processes; the thread count is
taken from ``IRS_PRECODING_THREADS`` (default: all cores). Every random
stream is keyed by (N, K, Nr, realization), so the output does not depend
on the number of workers.
"""

import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import List, Union

import numpy as np

from .codebook import design_codebooks, parse_scheme
from .mimo import alternating_design
from .signals import (
    DEFAULT_ENUMERATION_CAP,
    DomainError,
    make_constellation,
    sample_channels,
    substream,
)
from .simulation import estimate_ser_curve

CSV_HEADER = ("scheme", "B", "N", "K", "Nr", "snr_db", "ser_mean", "ser_stderr",
              "realizations", "draws", "wall_time_s", "seed")
THREADS_ENV = "IRS_PRECODING_THREADS"


class ConfigError(ValueError):
    """Invalid sweep configuration."""


IntOrList = Union[int, List[int]]


@dataclass
class SweepConfig:
    """Sweep description; the JSON config file mirrors these fields.

    ``snr_db`` is the total-power SNR ``P / sigma**2`` unless
    ``per_user_power`` is set, in which case ``P = K * 10**(snr_db / 10)``.
    """

    N: IntOrList
    snr_db: List[float]
    schemes: List[str] = field(default_factory=lambda: ["inf", "3", "2", "1", "1-bnb"])
    M: int = 4
    K: IntOrList = 2
    Nr: IntOrList = 1
    realizations: int = 200
    draws: int = 100
    seed: int = 0
    output: str = "ser.csv"
    per_user_power: bool = False
    restarts: int = 3
    max_iter: int = 20
    delta_th: float = 1e-3

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    @staticmethod
    def _as_list(v):
        return list(v) if isinstance(v, (list, tuple)) else [v]

    @property
    def N_list(self):
        return self._as_list(self.N)

    @property
    def K_list(self):
        return self._as_list(self.K)

    @property
    def Nr_list(self):
        return self._as_list(self.Nr)

    def validate(self):
        def positive_int(name, v):
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")

        for name in ("N", "K", "Nr"):
            values = self._as_list(getattr(self, name))
            if not values:
                raise ConfigError(f"{name} list is empty")
            for v in values:
                positive_int(name, v)
        for name in ("realizations", "draws", "M"):
            positive_int(name, getattr(self, name))
        if not isinstance(self.restarts, int) or self.restarts < 0:
            raise ConfigError("restarts must be a non-negative integer")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not self.snr_db:
            raise ConfigError("snr_db list is empty")
        if not all(isinstance(s, (int, float)) and math.isfinite(s) for s in self.snr_db):
            raise ConfigError("snr_db entries must be finite numbers")
        if not self.schemes:
            raise ConfigError("schemes list is empty")
        try:
            make_constellation(self.M)
            names = [parse_scheme(s).name for s in self.schemes]
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        if len(set(names)) != len(names):
            raise ConfigError("duplicate schemes")
        for K in self.K_list:
            if self.M ** K > DEFAULT_ENUMERATION_CAP:
                raise ConfigError(f"M**K = {self.M ** K} exceeds the cap of {DEFAULT_ENUMERATION_CAP}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SerRecord:
    scheme: str
    B: object
    N: int
    K: int
    Nr: int
    snr_db: float
    ser_mean: float
    ser_stderr: float
    realizations: int
    draws: int
    wall_time_s: float
    seed: int

    def row(self):
        def g(x):
            return format(x, ".9g")

        return [self.scheme, str(self.B), str(self.N), str(self.K), str(self.Nr),
                g(float(self.snr_db)), g(self.ser_mean), g(self.ser_stderr),
                str(self.realizations), str(self.draws), g(self.wall_time_s), str(self.seed)]


def _realization(task):
    """Design and evaluate every scheme on one channel realization.

    Returns error counts of shape ``(schemes, snrs)``, the number of
    decisions per cell, and the seconds spent per scheme.
    """
    cfg, N, K, Nr, r = task
    const = make_constellation(cfg["M"])
    schemes = [parse_scheme(s) for s in cfg["schemes"]]
    key = (N, K, Nr, r)
    channels = sample_channels(N, K, Nr, stream=substream(cfg["seed"], "channel", *key))
    power_scale = K if cfg["per_user_power"] else 1.0
    errors = np.zeros((len(schemes), len(cfg["snr_db"])), dtype=np.int64)
    seconds = np.zeros(len(schemes))
    trials = 0

    def evaluate(i, book, combiners, elapsed):
        nonlocal trials
        t0 = time.perf_counter()
        ests = estimate_ser_curve(book, channels, const, cfg["snr_db"], cfg["draws"],
                                  substream(cfg["seed"], "noise", *key),
                                  combiners=combiners, power_scale=power_scale)
        errors[i] = [e.errors for e in ests]
        trials = ests[0].trials
        seconds[i] = elapsed + time.perf_counter() - t0

    if Nr == 1:
        t0 = time.perf_counter()
        books = design_codebooks(channels.h, const, schemes, seed=cfg["seed"], key=key,
                                 restarts=cfg["restarts"])
        shared = (time.perf_counter() - t0) / len(schemes)
        for i, s in enumerate(schemes):
            evaluate(i, books[s.name], None, shared)
    else:
        for i, s in enumerate(schemes):
            t0 = time.perf_counter()
            book, W, _ = alternating_design(channels, const, s, seed=cfg["seed"], key=key,
                                            max_iter=cfg["max_iter"], delta_th=cfg["delta_th"],
                                            restarts=cfg["restarts"])
            evaluate(i, book, W, time.perf_counter() - t0)
    return errors, trials, seconds


def thread_count(threads=None):
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def _check_writable(path):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(prefix=".probe-", dir=directory)
        os.close(fd)
        os.remove(tmp)
    except OSError as exc:
        raise ConfigError(f"output path {path} is not writable: {exc}") from exc


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def records_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def run_sweep(config: SweepConfig, threads=None, progress=sys.stderr, write=True):
    """Run the full sweep and write the CSV (plus a ``.meta.json`` sidecar).

    Returns
    -------
    list of SerRecord
        In the order (N, K, Nr, scheme, snr).
    """
    config.validate()
    if write:
        _check_writable(config.output)
    cfg = config.to_dict()
    schemes = [parse_scheme(s) for s in config.schemes]
    cfg["schemes"] = [s.name for s in schemes]
    cfg["snr_db"] = [float(s) for s in config.snr_db]
    workers = thread_count(threads)
    R = config.realizations
    records = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for N, K, Nr in itertools.product(config.N_list, config.K_list, config.Nr_list):
            tasks = [(cfg, N, K, Nr, r) for r in range(R)]
            results = list(pool.map(_realization, tasks)) if pool else [_realization(t) for t in tasks]
            errs = np.stack([res[0] for res in results])  # (R, schemes, snrs)
            trials = results[0][1]
            secs = np.sum([res[2] for res in results], axis=0)
            ser_r = errs / trials
            for i, s in enumerate(schemes):
                for j, snr in enumerate(cfg["snr_db"]):
                    mean = float(errs[:, i, j].sum() / (trials * R))
                    if R > 1:
                        se = float(np.std(ser_r[:, i, j], ddof=1) / math.sqrt(R))
                    else:
                        se = math.sqrt(mean * (1 - mean) / trials)
                    rec = SerRecord(scheme=s.name, B=s.bits, N=N, K=K, Nr=Nr, snr_db=snr,
                                    ser_mean=mean, ser_stderr=se, realizations=R,
                                    draws=config.draws,
                                    wall_time_s=float(secs[i]) / len(cfg["snr_db"]),
                                    seed=config.seed)
                    records.append(rec)
                    if progress is not None:
                        print(f"[sweep] scheme={s.name} N={N} K={K} Nr={Nr} snr={snr:g} dB "
                              f"ser={mean:.4g} +- {se:.2g}", file=progress, flush=True)
    finally:
        if pool is not None:
            pool.shutdown()
    if write:
        _atomic_write(config.output, records_to_csv(records))
        meta = {
            "config": config.to_dict(),
            "symbol_index_digits": "least significant base-M digit = user 1",
            "power": "P = K * 10**(snr_db/10)" if config.per_user_power else "P = 10**(snr_db/10)",
            "noise_sigma": 1.0,
            "ser_stderr": "standard error across channel realizations",
        }
        _atomic_write(config.output + ".meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return records

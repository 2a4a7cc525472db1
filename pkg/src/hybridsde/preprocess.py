"""Local means and the whole-data noise-variance estimator.

Also holds the observation file formats. The binary layout is a 32-byte
little-endian header followed by the row-major ``float64`` payload of the
``(n + 1) x d`` observation matrix::

    offset  type     field
    0       4s       magic  b"HSDE"
    4       uint32   version (1)
    8       uint64   n
    16      uint32   d
    20      float64  h
    28      4x       reserved

The CSV form has an optional ``# h=<float>`` comment line, a header row
``y1,...,yd`` and one row per observation.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .schedule import BlockSchedule

MAGIC = b"HSDE"
VERSION = 1
_HEADER = struct.Struct("<4sIQId4x")
_CHUNK = 1 << 16


@dataclass(frozen=True)
class NoisyObservations:
    """Equally spaced noisy observations ``y[0..n]`` with step ``h``."""

    y: np.ndarray
    h: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if y.ndim != 2 or y.shape[0] < 2:
            raise ValueError("observations must be an (n+1, d) array with n >= 1")
        if not np.all(np.isfinite(y)):
            raise ValueError("observations contain non-finite values")
        if not self.h > 0:
            raise ValueError("h must be positive")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.shape[0] - 1

    @property
    def d(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class LocalMeanSeries:
    ybar: np.ndarray
    schedule: BlockSchedule


@dataclass(frozen=True)
class NoiseVariance:
    lambda_hat: np.ndarray


def local_means(obs: NoisyObservations, sched: BlockSchedule) -> LocalMeanSeries:
    """Block averages of ``p`` consecutive observations.

    Only the first ``k * p`` observations are used; the tail is dropped.
    """
    k, p = sched.k, sched.p
    if k * p > obs.y.shape[0]:
        raise ValueError(f"schedule needs {k * p} observations, have {obs.y.shape[0]}")
    ybar = obs.y[: k * p].reshape(k, p, obs.d).mean(axis=1)
    return LocalMeanSeries(ybar=ybar, schedule=sched)


def estimate_noise_variance(obs: NoisyObservations) -> NoiseVariance:
    """``(1/2n) sum (y[i+1]-y[i])(y[i+1]-y[i])^T`` over the whole sample."""
    y = obs.y
    n, d = obs.n, obs.d
    total = np.zeros((d, d))
    comp = np.zeros((d, d))
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        dy = y[start + 1 : stop + 1] - y[start:stop]
        part = dy.T @ dy
        # Neumaier-compensated accumulation across chunks
        t = total + part
        big = np.abs(total) >= np.abs(part)
        comp += np.where(big, (total - t) + part, (part - t) + total)
        total = t
    lam = (total + comp) / (2.0 * n)
    return NoiseVariance(lambda_hat=0.5 * (lam + lam.T))


# ---------------------------------------------------------------------------
# file formats


def write_observations(path, obs: NoisyObservations) -> Path:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return write_observations_csv(path, obs)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, obs.n, obs.d, float(obs.h)))
        fh.write(np.ascontiguousarray(obs.y, dtype="<f8").tobytes())
    return path


def read_observations(path, h: float | None = None) -> NoisyObservations:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_observations_csv(path, h=h)
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, n, d, h_file = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        y = np.fromfile(fh, dtype="<f8")
    if y.size != (n + 1) * d:
        raise ValueError(f"{path}: payload has {y.size} values, expected {(n + 1) * d}")
    return NoisyObservations(y=y.reshape(n + 1, d).astype(float), h=h if h is not None else h_file)


def write_observations_csv(path, obs: NoisyObservations) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# h={obs.h!r}\n")
        w = csv.writer(fh)
        w.writerow([f"y{i + 1}" for i in range(obs.d)])
        for row in obs.y:
            w.writerow([repr(float(v)) for v in row])
    return path


def read_observations_csv(path, h: float | None = None) -> NoisyObservations:
    h_file = None
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                key, _, val = s[1:].partition("=")
                if key.strip() == "h":
                    h_file = float(val)
                continue
            rows.append(s)
    if not rows:
        raise ValueError(f"{path}: no data")
    reader = csv.reader(rows)
    first = next(reader)
    data = []
    try:
        data.append([float(v) for v in first])
    except ValueError:
        pass  # header row
    data.extend([float(v) for v in r] for r in reader)
    h = h if h is not None else h_file
    if h is None:
        raise ValueError(f"{path}: step h not given in file or arguments")
    return NoisyObservations(y=np.array(data, dtype=float), h=h)

"""Data-block streams: spiked covariance samples, synthetic harmonic
trajectories, and delimited-text trajectory files.

All randomness flows through numpy's seedable PCG64 generators with a
documented draw order, so identical (model, seed) pairs reproduce
bit-identical sample sequences across runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, InvalidDims, ParseError, RaggedRows
from .linalg import DataBlock


@dataclass(frozen=True)
class SpikedModel:
    """Generative model x = A z + sigma * N with fixed component matrix A."""

    A: np.ndarray          # (d, k), entries in [-1, 1]
    sigma: float
    seed: object           # int or SeedSequence that produced A

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        if A.ndim != 2:
            raise InvalidDims(f"A must be 2-d, got shape {A.shape}")
        if np.abs(A).max(initial=0.0) > 1.0:
            raise InvalidDims("entries of A must lie in [-1, 1]")
        if self.sigma < 0:
            raise InvalidDims(f"sigma must be >= 0, got {self.sigma}")
        object.__setattr__(self, "A", A)

    @property
    def d(self):
        return self.A.shape[0]

    @property
    def k(self):
        return self.A.shape[1]


def make_spiked_model(d, k, sigma, seed):
    """Draw the fixed component matrix A i.i.d. uniform on [-1, 1].

    The same (d, k, seed) always yields the same A; ``sigma`` does not
    consume randomness.
    """
    if not 1 <= k <= d:
        raise InvalidDims(f"need 1 <= k <= d, got k={k}, d={d}")
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, size=(d, k))
    return SpikedModel(A=A, sigma=float(sigma), seed=seed)


def spiked_sample(model, rng):
    """One sample A z + sigma * N.

    Draw order: the k entries of z first, then the d entries of N, all
    standard normal from ``rng``'s stream.
    """
    z = rng.standard_normal(model.k)
    noise = rng.standard_normal(model.d)
    return model.A @ z + model.sigma * noise


def spiked_matrix(model, n, rng):
    """Generate n samples as a (d, n) matrix.

    Consumes exactly the same normal stream as n successive
    ``spiked_sample`` calls (z_i then N_i per sample); values agree with
    the sequential path up to summation order in the matrix product.
    """
    raw = rng.standard_normal((n, model.k + model.d))
    Z = raw[:, :model.k]
    noise = raw[:, model.k:]
    return np.ascontiguousarray(model.A @ Z.T + model.sigma * noise.T)


@dataclass(frozen=True)
class HarmonicModel:
    """Sum of sinusoidal modes along fixed orthogonal directions.

    Stand-in for trajectory data whose coordinates move in spring-like
    fashion: sample t is sum_j directions[:, j] * amplitudes[j] *
    sin(angular_frequencies[j] * t + phases[j]) plus isotropic noise.
    """

    directions: np.ndarray           # (d, m), orthonormal columns
    amplitudes: np.ndarray           # (m,), strictly decreasing, > 0
    angular_frequencies: np.ndarray  # (m,), radians per step, > 0
    phases: np.ndarray               # (m,), radians
    noise_sigma: float
    seed: object

    def __post_init__(self):
        Q = np.asarray(self.directions, dtype=np.float64)
        amps = np.asarray(self.amplitudes, dtype=np.float64)
        freqs = np.asarray(self.angular_frequencies, dtype=np.float64)
        phases = np.asarray(self.phases, dtype=np.float64)
        m = Q.shape[1]
        if not (amps.shape == freqs.shape == phases.shape == (m,)):
            raise InvalidDims("per-mode arrays must all have length m")
        gram = Q.T @ Q
        if np.abs(gram - np.eye(m)).max() > 1e-10:
            raise InvalidDims("mode directions must be orthonormal")
        if np.any(np.diff(amps) >= 0) or np.any(amps <= 0):
            raise InvalidDims("amplitudes must be positive and strictly decreasing")
        if np.any(freqs <= 0):
            raise InvalidDims("angular frequencies must be positive")
        if self.noise_sigma < 0:
            raise InvalidDims(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        for name, arr in (("directions", Q), ("amplitudes", amps),
                          ("angular_frequencies", freqs), ("phases", phases)):
            object.__setattr__(self, name, arr)

    @property
    def d(self):
        return self.directions.shape[0]

    @property
    def n_modes(self):
        return self.directions.shape[1]


def make_harmonic_model(d, n_modes, *, amp_max=3.0, amp_decay=0.88,
                        freq_range=(0.005, 0.25), noise_sigma=0.1, seed=0):
    """Random harmonic model with slow dominant modes.

    Directions come from the QR factor of a Gaussian matrix; amplitudes
    decay geometrically and frequencies are sorted ascending so the
    largest-amplitude modes oscillate slowest, the way soft collective
    modes dominate spring-like systems.
    """
    if not 1 <= n_modes <= d:
        raise InvalidDims(f"need 1 <= n_modes <= d, got {n_modes}, d={d}")
    if not 0 < amp_decay < 1:
        raise InvalidDims(f"amp_decay must be in (0, 1), got {amp_decay}")
    rng = np.random.default_rng(seed)
    directions, _ = np.linalg.qr(rng.standard_normal((d, n_modes)))
    amplitudes = amp_max * amp_decay ** np.arange(n_modes)
    frequencies = np.sort(rng.uniform(freq_range[0], freq_range[1], n_modes))
    phases = rng.uniform(0.0, 2.0 * np.pi, n_modes)
    return HarmonicModel(directions=directions, amplitudes=amplitudes,
                         angular_frequencies=frequencies, phases=phases,
                         noise_sigma=float(noise_sigma), seed=seed)


def harmonic_sample(model, t, rng):
    """Sample at integer step t; draws d noise normals from ``rng``."""
    if t < 0:
        raise InvalidDims(f"step index must be >= 0, got {t}")
    coeff = model.amplitudes * np.sin(model.angular_frequencies * t + model.phases)
    x = model.directions @ coeff
    return x + model.noise_sigma * rng.standard_normal(model.d)


def harmonic_matrix(model, n, rng):
    """Samples t = 0..n-1 as a (d, n) matrix.

    Noise draws match n successive ``harmonic_sample`` calls (d normals
    per sample, in sample order).
    """
    steps = np.arange(n)
    coeff = model.amplitudes[:, None] * np.sin(
        np.outer(model.angular_frequencies, steps) + model.phases[:, None])
    noise = rng.standard_normal((n, model.d))
    return np.ascontiguousarray(model.directions @ coeff
                                + model.noise_sigma * noise.T)


@dataclass(frozen=True)
class TrajectorySource:
    """Provenance of a loaded trajectory file."""

    path: str
    d: int      # coordinates per timestep (columns per row)
    n: int      # timesteps (rows)
    center: bool = False


_TOKEN = re.compile(rb"[^\s]+")


def _split_fields(raw_line):
    """Split a raw line into (bytes, offset-within-line) fields."""
    if b"," in raw_line:
        fields = []
        pos = 0
        for piece in raw_line.split(b","):
            fields.append((piece.strip(), pos))
            pos += len(piece) + 1
        return fields
    if b"\t" in raw_line:
        fields = []
        pos = 0
        for piece in raw_line.split(b"\t"):
            fields.append((piece.strip(), pos))
            pos += len(piece) + 1
        return fields
    return [(m.group(0), m.start()) for m in _TOKEN.finditer(raw_line)]


def _parse_row(raw_line, line_no, line_offset, expected):
    fields = _split_fields(raw_line)
    if expected is not None and len(fields) != expected:
        raise RaggedRows(expected, len(fields), line_no)
    values = []
    for col, (token, off) in enumerate(fields, start=1):
        try:
            value = float(token)
        except ValueError:
            raise ParseError(line_no, col, line_offset + off) from None
        if not np.isfinite(value):
            raise ParseError(line_no, col, line_offset + off,
                             f"line {line_no}, field {col}: non-finite value")
        values.append(value)
    return values


def _looks_like_header(raw_line):
    fields = _split_fields(raw_line)
    if not fields:
        return False
    try:
        float(fields[0][0])
    except ValueError:
        return True
    return False


def iter_trajectory_rows(path):
    """Yield one float64 vector per timestep, streaming the file once.

    Separator is auto-detected per line among comma, tab and space runs; a
    first line whose leading field is non-numeric is treated as a header
    and skipped; blank lines are ignored.
    """
    offset = 0
    line_no = 0
    expected = None
    first_content = True
    with open(path, "rb") as fh:
        for raw in fh:
            line_no += 1
            line_offset = offset
            offset += len(raw)
            stripped = raw.strip()
            if not stripped:
                continue
            body = raw.rstrip(b"\r\n")
            if first_content:
                first_content = False
                if _looks_like_header(body):
                    continue
            values = _parse_row(body, line_no, line_offset, expected)
            if expected is None:
                expected = len(values)
            yield np.array(values, dtype=np.float64)


def load_trajectory(path, center=False):
    """Load a delimited-text trajectory into memory.

    Rows are timesteps and fields are coordinates, so the returned matrix
    is (d, n) with one column per timestep. Returns
    ``(TrajectorySource, matrix)``.
    """
    rows = list(iter_trajectory_rows(path))
    if not rows:
        X = np.zeros((0, 0))
        return TrajectorySource(path=str(path), d=0, n=0, center=center), X
    X = np.ascontiguousarray(np.vstack(rows).T)
    source = TrajectorySource(path=str(path), d=X.shape[0], n=X.shape[1],
                              center=center)
    return source, X


def write_trajectory(path, X):
    """Write a (d, n) matrix as comma-separated rows, one per timestep.

    Values are serialized with 17 significant digits so a load round-trips
    bit-exactly.
    """
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for col in range(X.shape[1]):
            fh.write(",".join(format(v, ".17g") for v in X[:, col]))
            fh.write("\n")


def blocks(source, B):
    """Partition a sample stream into consecutive DataBlocks of size B.

    ``source`` is either a (d, n) matrix or an iterable of d-vectors. The
    final partial block is emitted as-is; its true cardinality is what the
    estimator divides by.
    """
    if B < 1:
        raise InvalidDims(f"block size must be >= 1, got {B}")
    if isinstance(source, np.ndarray):
        n = source.shape[1]
        for index, start in enumerate(range(0, n, B)):
            yield DataBlock(
                np.ascontiguousarray(source[:, start:start + B]), index)
        return

    buffer = []
    index = 0
    for sample in source:
        buffer.append(np.asarray(sample, dtype=np.float64))
        if len(buffer) == B:
            yield DataBlock(np.ascontiguousarray(np.column_stack(buffer)), index)
            buffer = []
            index += 1
    if buffer:
        yield DataBlock(np.ascontiguousarray(np.column_stack(buffer)), index)


def center_stream(block_iter, mode="none", mean=None):
    """Center a block stream sample-wise.

    - ``none``: pass blocks through untouched.
    - ``precomputed_mean``: subtract the supplied d-vector from every sample.
    - ``running_mean``: subtract the mean of all samples seen in *prior*
      blocks (initially zero), updating after each block; single-pass
      compatible.
    """
    if mode == "none":
        yield from block_iter
        return
    if mode == "precomputed_mean":
        if mean is None:
            raise DimensionMismatch("precomputed_mean requires a mean vector")
        mean = np.asarray(mean, dtype=np.float64)
        for block in block_iter:
            if block.samples.shape[0] != mean.shape[0]:
                raise DimensionMismatch(
                    f"mean dimension {mean.shape[0]} != block dimension "
                    f"{block.samples.shape[0]}")
            yield DataBlock(block.samples - mean[:, None], block.index)
        return
    if mode == "running_mean":
        total = None
        count = 0
        for block in block_iter:
            if total is None:
                total = np.zeros(block.samples.shape[0])
            current = total / count if count else np.zeros_like(total)
            yield DataBlock(block.samples - current[:, None], block.index)
            total += block.samples.sum(axis=1)
            count += block.samples.shape[1]
        return
    raise ValueError(f"unknown centering mode {mode!r}")

"""Path generation: Donsker walks, kernel schemes, step-kernel ladders, ensembles.

Every scheme here is linear in its innovations, so it is represented by a
:class:`LinearScheme` (row times plus a weight matrix).  Ensembles draw one
independent substream per path, keyed by ``(master_seed, path index)``, and
process paths in fixed-size blocks; the output therefore depends only on
the seed and the scheme, never on the number of workers.
"""

from __future__ import annotations

import json
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path as FilePath
from typing import Sequence

import numpy as np

from . import kernel as kern
from .discretize import KernelMatrix, grid_index, overlap_matrix
from .errors import DomainError, EnsembleError, SubfbmError
from .kernel import KernelSpec

DISTRIBUTIONS = ("rademacher", "gaussian")
BLOCK_SIZE = 512
ENSEMBLE_MAGIC = b"SFBMENSB"
ENSEMBLE_VERSION = 1


@dataclass(frozen=True)
class NoiseStream:
    """Seedable i.i.d. innovations with mean 0 and variance 1."""

    distribution: str = "rademacher"
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise DomainError(f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if int(self.stream_id) < 0:
            raise DomainError("stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(seq))

    def draw(self, size: int) -> np.ndarray:
        rng = self.generator()
        if self.distribution == "gaussian":
            return rng.standard_normal(size)
        return 2.0 * rng.integers(0, 2, size=size, dtype=np.int8).astype(float) - 1.0

    def substream(self, stream_id: int) -> "NoiseStream":
        return replace(self, stream_id=stream_id)


@dataclass(frozen=True, eq=False)
class Path:
    times: np.ndarray
    values: np.ndarray
    scheme: str
    n: int | None
    H: float | None
    seed: int | None = None
    stream_id: int | None = None
    distribution: str | None = None


@dataclass(frozen=True, eq=False)
class LinearScheme:
    """values(times) = weights @ xi with ``xi`` of length ``dim``.

    ``gaussian_only`` marks schemes whose innovations are exact Gaussian
    increments regardless of the requested innovation law.
    """

    name: str
    times: np.ndarray
    weights: np.ndarray
    n: int | None = None
    H: float | None = None
    m: int | None = None
    gaussian_only: bool = False
    matrix_checksum: str | None = None

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def apply(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != self.dim:
            raise DomainError(f"{self.name}: expected {self.dim} innovations, got {xi.shape[-1]}")
        return xi @ self.weights.T

    def path(self, noise) -> Path:
        if isinstance(noise, NoiseStream):
            stream = self.noise_for(noise)
            xi = stream.draw(self.dim)
            meta = dict(seed=stream.seed, stream_id=stream.stream_id, distribution=stream.distribution)
        else:
            xi, meta = noise, {}
        return Path(self.times, self.apply(xi), self.name, self.n, self.H, **meta)

    def noise_for(self, noise: NoiseStream) -> NoiseStream:
        return replace(noise, distribution="gaussian") if self.gaussian_only else noise


def donsker_scheme(n) -> LinearScheme:
    n = grid_index(n)
    w = np.tril(np.ones((n + 1, n)), k=-1) / math.sqrt(n)
    return LinearScheme("donsker", np.arange(n + 1) / n, w, n=n)


def matrix_scheme(matrix: KernelMatrix) -> LinearScheme:
    return LinearScheme(matrix.scheme, matrix.times, matrix.weights, n=matrix.n, H=matrix.H,
                        m=matrix.m, matrix_checksum=matrix.checksum)


def _times_or_grid(times, n):
    if times is None:
        return np.arange(n + 1) / n
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0 or np.any(~((t >= 0) & (t <= 1))):
        raise DomainError("times must be a non-empty list in [0, 1]")
    return t if t[0] == 0.0 else np.concatenate([[0.0], t])


def walk_block_index(n: int, m: int) -> np.ndarray:
    """Block i (0-based) owning walk innovation j (0-based): floor(n i/m) <= j < floor(n (i+1)/m)."""
    starts = (n * np.arange(m)) // m
    return np.searchsorted(starts, np.arange(n), side="right") - 1


def walk_step_scheme(m, n, spec: KernelSpec, times: Sequence[float] | None = None) -> LinearScheme:
    """X_{m,n}(t) = sum_i K(t, t_{i-1}) W_n(Delta_i), whole blocks of the walk."""
    m, n = grid_index(m), grid_index(n)
    t_all = _times_or_grid(times, n)
    owner = walk_block_index(n, m)
    left = np.arange(m) / m
    kv = np.asarray(kern.k_sub(t_all[:, None], left[None, :], spec))
    return LinearScheme("sub_walk_step", t_all, kv[:, owner] / math.sqrt(n), n=n, H=spec.H, m=m)


def overlap_step_scheme(m, n, spec: KernelSpec, times: Sequence[float] | None = None) -> LinearScheme:
    """X~_{m,n}(t) = sum_k sqrt(n) int_{cell k} K^m(t, u) du xi_k over the whole support of K^m(t, .).

    The block containing t reaches past t, so rows are not triangular; the
    triangular ``sub_step`` kernel matrix truncates the same sum at floor(n t).
    """
    m, n = grid_index(m), grid_index(n)
    t_all = _times_or_grid(times, n)
    frac = overlap_matrix(n, m)
    kv = np.asarray(kern.k_sub(t_all[:, None], (np.arange(m) / m)[None, :], spec))
    w = np.sum(frac[None, :, :] * kv[:, None, :], axis=-1) / math.sqrt(n)
    return LinearScheme("sub_overlap_step", t_all, w, n=n, H=spec.H, m=m)


def boundary_rewrite_weights(m, n, spec: KernelSpec, t: float) -> np.ndarray:
    """Innovation weights of the whole-block sums with fractional boundary corrections.

    For each block i the whole-walk sum over floor(n t_{i-1})+1..floor(n t_i) is
    corrected by -frac(n t_{i-1}) xi_{floor(n t_{i-1})+1} and
    +frac(n t_i) xi_{floor(n t_i)+1}.  Valid for n >= m.
    """
    m, n = grid_index(m), grid_index(n)
    if n < m:
        raise DomainError("the boundary rewrite needs n >= m")
    kv = np.asarray(kern.k_sub(t, np.arange(m) / m, spec))
    w = walk_step_scheme(m, n, spec, [t]).weights[-1] * math.sqrt(n)
    for i in range(m):
        for edge, sign in ((i, -1.0), (i + 1, 1.0)):
            lo = (n * edge) // m
            frac = (n * edge - m * lo) / m
            if frac and lo < n:
                w[lo] += sign * frac * kv[i]
    return w / math.sqrt(n)


def wiener_scheme(m, spec: KernelSpec, times: Sequence[float] | None = None) -> LinearScheme:
    """X^_m(t) = sum_i K(t, t_{i-1}) W(Delta_i) with exact N(0, 1/m) block increments."""
    m = grid_index(m)
    t_all = _times_or_grid(times, m)
    kv = np.asarray(kern.k_sub(t_all[:, None], (np.arange(m) / m)[None, :], spec))
    return LinearScheme("sub_wiener", t_all, kv / math.sqrt(m), n=None, H=spec.H, m=m, gaussian_only=True)


def difference(a: LinearScheme, b: LinearScheme) -> LinearScheme:
    """Scheme a - b driven by the same innovations (rows matched by position)."""
    if a.weights.shape != b.weights.shape:
        raise DomainError(f"cannot difference {a.name} {a.weights.shape} and {b.name} {b.weights.shape}")
    return LinearScheme(f"{a.name}-{b.name}", a.times, a.weights - b.weights, n=a.n, H=a.H, m=a.m or b.m,
                        gaussian_only=a.gaussian_only or b.gaussian_only)


def exact_mean_square(scheme: LinearScheme) -> np.ndarray:
    """E[values**2] per row for unit-variance uncorrelated innovations."""
    return np.einsum("ij,ij->i", scheme.weights, scheme.weights)


# --- single paths -------------------------------------------------------------------------


def donsker_path(n, noise) -> Path:
    """W_n(k/n) = sum_{i<=k} xi_i / sqrt(n)."""
    n = grid_index(n)
    if isinstance(noise, NoiseStream):
        xi = noise.draw(n)
        meta = dict(seed=noise.seed, stream_id=noise.stream_id, distribution=noise.distribution)
    else:
        xi, meta = np.asarray(noise, dtype=float), {}
        if xi.shape != (n,):
            raise DomainError(f"donsker_path expected {n} innovations, got {xi.shape}")
    values = np.concatenate([[0.0], np.cumsum(xi)]) / math.sqrt(n)
    return Path(np.arange(n + 1) / n, values, "donsker", n, None, **meta)


def kernel_path(matrix: KernelMatrix, noise) -> Path:
    """values[r] = sum_i A[r][i] xi_i for one innovation vector."""
    return matrix_scheme(matrix).path(noise)


@dataclass(frozen=True, eq=False)
class SteppedPaths:
    walk: Path      # whole-block form X_{m,n}
    overlap: Path   # overlap form X~_{m,n}


def stepped_path(m, n, spec: KernelSpec, noise, times: Sequence[float] | None = None) -> SteppedPaths:
    """Both step-kernel constructions on the same innovations.

    Raises if the overlap form at t = 1 differs from the boundary-corrected
    whole-block sums.
    """
    m, n = grid_index(m), grid_index(n)
    walk = walk_step_scheme(m, n, spec, times)
    over = overlap_step_scheme(m, n, spec, times)
    if n >= m:
        rewrite = boundary_rewrite_weights(m, n, spec, 1.0)
        ref = overlap_step_scheme(m, n, spec, [1.0]).weights[-1]
        if not np.allclose(rewrite, ref, rtol=1e-12, atol=1e-14):
            raise SubfbmError("overlap form and boundary-corrected form disagree at t = 1")
    if isinstance(noise, NoiseStream):
        xi = noise.draw(n)
    else:
        xi = np.asarray(noise, dtype=float)
    meta = {}
    if isinstance(noise, NoiseStream):
        meta = dict(seed=noise.seed, stream_id=noise.stream_id, distribution=noise.distribution)
    return SteppedPaths(walk.path(xi) if not meta else replace(walk.path(xi), **meta),
                        over.path(xi) if not meta else replace(over.path(xi), **meta))


def wiener_discretization_path(m, spec: KernelSpec, noise, times: Sequence[float] | None = None) -> Path:
    """X^_m on ``times`` (default i/m); innovations are forced Gaussian."""
    return wiener_scheme(m, spec, times).path(noise)


# --- ensembles ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    values: np.ndarray  # (M, len(times))
    times: np.ndarray
    scheme: str
    master_seed: int
    distribution: str
    n: int | None = None
    H: float | None = None
    m: int | None = None
    matrix_checksum: str | None = None

    @property
    def M(self) -> int:
        return self.values.shape[0]

    def path(self, j: int) -> Path:
        return Path(self.times, self.values[j], self.scheme, self.n, self.H, self.master_seed, j, self.distribution)

    def index_of(self, t: float) -> int:
        j = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[j] - t) > 1e-12:
            raise DomainError(f"time {t} is not on the ensemble grid")
        return j

    def metadata(self) -> dict:
        return {
            "scheme": self.scheme, "H": self.H, "n": self.n, "m": self.m, "M": self.M,
            "master_seed": self.master_seed, "distribution": self.distribution,
            "matrix_checksum": self.matrix_checksum, "times": [float(t) for t in self.times],
        }


def _draw_block(scheme: LinearScheme, base: NoiseStream, start: int, stop: int) -> np.ndarray:
    xi = np.empty((stop - start, scheme.dim))
    for r, j in enumerate(range(start, stop)):
        xi[r] = base.substream(j).draw(scheme.dim)
    return scheme.apply(xi)


def run_ensemble(scheme: LinearScheme, M: int, master_seed: int, *, distribution: str = "rademacher",
                 workers: int = 1, block_size: int = BLOCK_SIZE, max_bytes: int | None = None) -> PathEnsemble:
    """M independent paths of ``scheme``; path j uses substream j of ``master_seed``."""
    if int(M) != M or M < 1:
        raise DomainError("M must be an integer >= 1")
    M = int(M)
    base = scheme.noise_for(NoiseStream(distribution, master_seed, 0))
    rows = len(scheme.times)
    if max_bytes is not None and M * rows * 8 > max_bytes:
        raise EnsembleError(f"ensemble needs {M * rows * 8} bytes, limit is {max_bytes}", completed=0)
    try:
        out = np.empty((M, rows))
    except MemoryError as exc:
        raise EnsembleError("cannot allocate ensemble", completed=0) from exc
    blocks = [(lo, min(lo + block_size, M)) for lo in range(0, M, block_size)]
    done = 0

    def work(b):
        lo, hi = b
        out[lo:hi] = _draw_block(scheme, base, lo, hi)
        return hi - lo

    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for k in pool.map(work, blocks):
                    done += k
        else:
            for b in blocks:
                done += work(b)
    except MemoryError as exc:
        raise EnsembleError("ran out of memory during the ensemble", completed=done) from exc
    return PathEnsemble(out, scheme.times, scheme.name, int(master_seed), base.distribution,
                        n=scheme.n, H=scheme.H, m=scheme.m, matrix_checksum=scheme.matrix_checksum)


def save_ensemble(ens: PathEnsemble, path, fmt: str = "csv") -> FilePath:
    """Write the ensemble (CSV or binary) plus a ``.meta.json`` sidecar; returns the sidecar path."""
    path = FilePath(path)
    if fmt == "csv":
        ids = np.arange(ens.M, dtype=float)[:, None]
        header = "seed_id," + ",".join(repr(float(t)) for t in ens.times)
        body = np.hstack([ids, ens.values])
        fmts = ["%d"] + ["%.17g"] * ens.values.shape[1]
        np.savetxt(path, body, delimiter=",", header=header, comments="", fmt=fmts)
    elif fmt == "bin":
        header = json.dumps(ens.metadata(), sort_keys=True).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(ENSEMBLE_MAGIC)
            fh.write(struct.pack("<II", ENSEMBLE_VERSION, len(header)))
            fh.write(header)
            fh.write(ens.values.astype("<f8").tobytes())
    else:
        raise DomainError(f"unknown ensemble format {fmt!r}")
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps(ens.metadata(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def load_ensemble(path) -> PathEnsemble:
    path = FilePath(path)
    raw = path.read_bytes()
    if raw[:8] == ENSEMBLE_MAGIC:
        _, hlen = struct.unpack("<II", raw[8:16])
        meta = json.loads(raw[16 : 16 + hlen].decode("utf-8"))
        values = np.frombuffer(raw[16 + hlen :], dtype="<f8").astype(float).reshape(meta["M"], -1)
    else:
        meta = json.loads(path.with_name(path.name + ".meta.json").read_text(encoding="utf-8"))
        body = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        values = body[:, 1:]
    return PathEnsemble(values, np.asarray(meta["times"], dtype=float), meta["scheme"], meta["master_seed"],
                        meta["distribution"], n=meta.get("n"), H=meta.get("H"), m=meta.get("m"),
                        matrix_checksum=meta.get("matrix_checksum"))

"""Kernel matrices realizing the random-walk schemes.

Row ``r`` of a :class:`KernelMatrix` holds the weights of the innovations
``xi_1..xi_n`` at time ``times[r]``, so a path is ``weights @ xi``.  For the
main scheme the weights are cell averages

    A[k][i] = sqrt(n) * int_{(i-1)/n}^{i/n} K(k/n, u) du,

computed from the primitive of the unit kernel section via the scaling
``K(t, u) = t**(H - 1/2) K(1, u/t)``.  Matrices serialize to a small binary
cache format (see :func:`save_matrix`).
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernel as kern
from .errors import CacheError, DomainError, QuadratureError
from .kernel import KernelSpec

SCHEMES = ("sub_floor", "sub_exact", "sub_step", "fbm")

MAGIC = b"SFBMKMAT"
FORMAT_VERSION = 1

_ROW_BLOCK = 64


def grid_index(n) -> int:
    try:
        ok = not isinstance(n, bool) and int(n) == n and n >= 1
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise DomainError(f"grid size n must be an integer >= 1, got {n!r}")
    return int(n)


def floor_index(n: int, t: float) -> int:
    """floor(n t), robust to t = k/n having been rounded just below k/n."""
    x = n * t
    k = math.floor(x)
    if x - k > 1.0 - 1e-9:
        k += 1
    return k


def interval_overlap(a1, a2, b1, b2):
    """Length of [a1, a2) intersected with [b1, b2) (vectorized)."""
    return np.maximum(0.0, np.minimum(a2, b2) - np.maximum(a1, b1))


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Innovation weights of one discretized scheme.

    weights: (len(times), n) array; row r is zero beyond ``support[r]``.
    """

    scheme: str
    n: int
    spec: KernelSpec
    times: np.ndarray
    weights: np.ndarray
    support: np.ndarray
    m: int | None = None

    @property
    def H(self) -> float:
        return self.spec.H

    def packed(self) -> np.ndarray:
        return np.concatenate([self.weights[r, : self.support[r]] for r in range(len(self.times))])

    @property
    def checksum(self) -> str:
        return hashlib.sha256(self.packed().astype("<f8").tobytes()).hexdigest()

    def row_variance(self) -> np.ndarray:
        """sum_i A[r][i]**2, the variance of the scheme at each row time."""
        return np.einsum("ij,ij->i", self.weights, self.weights)

    def header(self) -> dict:
        return {
            "scheme": self.scheme,
            "n": self.n,
            "m": self.m,
            "H": self.spec.H,
            "c_sub": self.spec.c_sub,
            "c_fbm": self.spec.c_fbm,
            "quad": self.spec.quad.to_dict(),
            "times": [float(t) for t in self.times],
            "support": [int(L) for L in self.support],
            "checksum": self.checksum,
        }


def _unit_cells(kind: str, ks: np.ndarray, spec: KernelSpec) -> list[np.ndarray]:
    """[G(i/k) - G((i-1)/k) for i = 1..k] for each k, evaluated on unique fractions."""
    fracs = np.concatenate([np.arange(k + 1) / k for k in ks])
    uniq, inv = np.unique(fracs, return_inverse=True)
    try:
        g = kern.unit_primitive(kind, uniq, spec)
    except QuadratureError as exc:
        x = exc.location
        k = next((int(k) for k in ks if x is not None and abs(x * k - round(x * k)) < 1e-9), None)
        exc.location = {"x": x, "row": k, "cell": None if k is None else round(x * k)}
        raise
    vals = g[inv]
    out, pos = [], 0
    for k in ks:
        out.append(np.diff(vals[pos : pos + k + 1]))
        pos += k + 1
    return out


def _floor_rows(kind: str, n: int, spec: KernelSpec, ks: np.ndarray) -> list[np.ndarray]:
    c = spec.constant(kind)
    cells = _unit_cells(kind, ks, spec)
    return [math.sqrt(n) * c * (k / n) ** (spec.H + 0.5) * cell for k, cell in zip(ks, cells)]


def _build_grid_matrix(kind: str, scheme: str, n: int, spec: KernelSpec, workers: int) -> KernelMatrix:
    n = grid_index(n)
    weights = np.zeros((n + 1, n))
    blocks = [np.arange(lo, min(lo + _ROW_BLOCK, n + 1)) for lo in range(1, n + 1, _ROW_BLOCK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda ks: _floor_rows(kind, n, spec, ks), blocks))
    else:
        results = [_floor_rows(kind, n, spec, ks) for ks in blocks]
    for ks, rows in zip(blocks, results):
        for k, row in zip(ks, rows):
            weights[k, :k] = row
    times = np.arange(n + 1) / n
    return KernelMatrix(scheme, n, spec, times, weights, np.arange(n + 1))


def build_matrix_floor(n, spec: KernelSpec, *, workers: int = 1) -> KernelMatrix:
    """Cell-averaged sub-fBm kernel on the grid k/n (the main scheme)."""
    return _build_grid_matrix("sub", "sub_floor", n, spec, workers)


def build_matrix_fbm(n, spec: KernelSpec, *, workers: int = 1) -> KernelMatrix:
    """Cell-averaged fBm kernel on the grid k/n (Sottinen's scheme)."""
    return _build_grid_matrix("fbm", "fbm", n, spec, workers)


def _with_origin(times: Sequence[float]) -> np.ndarray:
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0 or np.any(~((t >= 0) & (t <= 1))):
        raise DomainError("times must be a non-empty list in [0, 1]")
    if t[0] != 0.0:
        t = np.concatenate([[0.0], t])
    return t


def build_matrix_exact(times: Sequence[float], n, spec: KernelSpec, *, kind: str = "sub") -> KernelMatrix:
    """Cell averages of K(t, .) at the exact times requested, cells up to floor(n t).

    A row for time 0 is prepended when missing so that paths start at 0.
    """
    n = grid_index(n)
    t_all = _with_origin(times)
    weights = np.zeros((t_all.size, n))
    support = np.zeros(t_all.size, dtype=int)
    edges = np.arange(n + 1) / n
    for r, t in enumerate(t_all):
        L = floor_index(n, t)
        if L == 0:
            continue
        weights[r, :L] = math.sqrt(n) * kern.cell_integral(kind, t, edges[:L], edges[1 : L + 1], spec)
        support[r] = L
    scheme = "sub_exact" if kind == "sub" else "fbm_exact"
    return KernelMatrix(scheme, n, spec, t_all, weights, support)


@dataclass(frozen=True)
class StepKernel:
    """Values K(t, t^m_{i-1}) of the piecewise-constant kernel on the partition i/m."""

    m: int
    t: float
    values: np.ndarray

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.m + 1) / self.m

    def __call__(self, u):
        """Evaluate K^m(t, u) for u in [0, 1]."""
        u = np.asarray(u, dtype=float)
        idx = np.clip(np.floor(u * self.m).astype(int), 0, self.m - 1)
        return self.values[idx]


def build_step_kernel(m, t: float, spec: KernelSpec) -> StepKernel:
    m = grid_index(m)
    left = np.arange(m) / m
    # cells with left edge >= t carry K(t, .) = 0; K(t, 0) = 0 by continuity
    return StepKernel(m, float(t), np.asarray(kern.k_sub(t, left, spec), dtype=float))


def overlap_matrix(n: int, m: int) -> np.ndarray:
    """O[j, i] = n * |[j/n, (j+1)/n) cap [i/m, (i+1)/m)|, the fraction of walk cell j in block i.

    Computed in integer units of 1/(n m) so that full and empty overlaps are exact.
    """
    j = np.arange(n)[:, None]
    i = np.arange(m)[None, :]
    units = np.maximum(0, np.minimum((j + 1) * m, (i + 1) * n) - np.maximum(j * m, i * n))
    return units / m


def build_matrix_step(m, n, spec: KernelSpec, times: Sequence[float] | None = None) -> KernelMatrix:
    """Weights of the step-kernel scheme X~_{m,n} (overlap form), rows at ``times``.

    Row t, innovation j <= floor(n t): sqrt(n) * int_{cell j} K^m(t, u) du.
    Defaults to the grid k/n.
    """
    m, n = grid_index(m), grid_index(n)
    t_all = np.arange(n + 1) / n if times is None else _with_origin(times)
    frac = overlap_matrix(n, m)
    weights = np.zeros((t_all.size, n))
    support = np.zeros(t_all.size, dtype=int)
    for r, t in enumerate(t_all):
        L = floor_index(n, t)
        if L == 0:
            continue
        step = build_step_kernel(m, t, spec)
        weights[r, :L] = (frac[:L] @ step.values) / math.sqrt(n)
        support[r] = L
    return KernelMatrix("sub_step", n, spec, t_all, weights, support, m=m)


# --- binary cache -------------------------------------------------------------------------


def save_matrix(matrix: KernelMatrix, path) -> None:
    """Write ``MAGIC | u32 version | u32 header length | JSON header | packed little-endian f64 rows``."""
    header = json.dumps(matrix.header(), sort_keys=True).encode("utf-8")
    payload = matrix.packed().astype("<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        fh.write(payload)


def load_matrix(path) -> KernelMatrix:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise CacheError(f"{path}: not a kernel matrix file")
    version, hlen = struct.unpack("<II", data[8:16])
    if version != FORMAT_VERSION:
        raise CacheError(f"{path}: unsupported format version {version}")
    try:
        header = json.loads(data[16 : 16 + hlen].decode("utf-8"))
    except ValueError as exc:
        raise CacheError(f"{path}: corrupt header") from exc
    payload = data[16 + hlen :]
    if hashlib.sha256(payload).hexdigest() != header["checksum"]:
        raise CacheError(f"{path}: checksum mismatch")
    spec = KernelSpec.from_dict(header)
    n = header["n"]
    times = np.asarray(header["times"], dtype=float)
    packed = np.frombuffer(payload, dtype="<f8").astype(float)
    support = np.asarray(header["support"], dtype=int)
    if support.size != times.size or packed.size != support.sum():
        raise CacheError(f"{path}: payload size does not match header")
    weights = np.zeros((times.size, n))
    pos = 0
    for r, L in enumerate(support):
        weights[r, :L] = packed[pos : pos + L]
        pos += L
    return KernelMatrix(header["scheme"], n, spec, times, weights, support, m=header.get("m"))


def cache_key(scheme: str, n: int, spec: KernelSpec, m: int | None = None, times=None) -> str:
    ident = {
        "scheme": scheme, "n": int(n), "m": m, "H": spec.H, "c_sub": spec.c_sub, "c_fbm": spec.c_fbm,
        "quad": spec.quad.to_dict(), "times": None if times is None else [float(t) for t in times],
    }
    return hashlib.sha256(json.dumps(ident, sort_keys=True).encode()).hexdigest()[:20]


def build_matrix(scheme: str, n, spec: KernelSpec, *, m=None, times=None, workers: int = 1) -> KernelMatrix:
    if scheme == "sub_floor":
        return build_matrix_floor(n, spec, workers=workers)
    if scheme == "fbm":
        return build_matrix_fbm(n, spec, workers=workers)
    if scheme == "sub_exact":
        if times is None:
            raise DomainError("sub_exact needs a list of times")
        return build_matrix_exact(times, n, spec)
    if scheme == "sub_step":
        if m is None:
            raise DomainError("sub_step needs m")
        return build_matrix_step(m, n, spec, times)
    raise DomainError(f"unknown matrix scheme {scheme!r}; expected one of {SCHEMES}")


def cached_matrix(scheme: str, n, spec: KernelSpec, cache_dir=None, *, m=None, times=None,
                  workers: int = 1, use_cache: bool = True) -> tuple[KernelMatrix, bool]:
    """Load the matrix from ``cache_dir`` when present, else build (and store) it.

    Returns ``(matrix, hit)``.
    """
    if cache_dir is None or not use_cache:
        mat = build_matrix(scheme, n, spec, m=m, times=times, workers=workers)
        if cache_dir is not None:
            Path(cache_dir).mkdir(parents=True, exist_ok=True)
            save_matrix(mat, Path(cache_dir) / f"{scheme}-{cache_key(scheme, n, spec, m, times)}.kmat")
        return mat, False
    path = Path(cache_dir) / f"{scheme}-{cache_key(scheme, n, spec, m, times)}.kmat"
    if path.exists():
        return load_matrix(path), True
    mat = build_matrix(scheme, n, spec, m=m, times=times, workers=workers)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    save_matrix(mat, path)
    return mat, False

"""Snapshot and field-block files.

Binary snapshot layout (little-endian)::

    magic    8s   b"SURFWAV\\0"
    version  u32
    n_modes  u32
    length   f64
    tau      f64
    hash     64s  hex sha256 of the run manifest (zero padded)
    coeffs   n_modes x (f64 re, f64 im), ascending j = -N/2+1 .. N/2

The CSV companion has columns ``j, k_j, re, im`` after ``#`` comment lines
carrying the same header fields.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import AmplitudeState, SpectralGrid

SNAPSHOT_MAGIC = b"SURFWAV\0"
FIELD_MAGIC = b"SURFFLD\0"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIIdd64s")
_FIELD_HEADER = struct.Struct("<8sIIIIdd64s")


class SnapshotFormatError(ValueError):
    """File is not a readable snapshot of the expected format."""


@dataclass(frozen=True)
class Snapshot:
    state: AmplitudeState
    grid: SpectralGrid
    manifest_hash: str
    version: int = FORMAT_VERSION


def _ascending_order(grid: SpectralGrid) -> np.ndarray:
    """FFT-order slots listed by ascending ``j``; the Nyquist slot comes last."""
    j = grid.j.copy()
    j[grid.nyquist] = grid.n_modes // 2
    return np.argsort(j, kind="stable")


def _hash_bytes(manifest_hash: str) -> bytes:
    raw = manifest_hash.encode("ascii")
    if len(raw) > 64:
        raise ValueError("manifest hash longer than 64 characters")
    return raw.ljust(64, b"\0")


def encode_snapshot(state: AmplitudeState, grid: SpectralGrid, manifest_hash: str = "") -> bytes:
    if state.n_modes != grid.n_modes:
        raise ValueError("state and grid sizes differ")
    header = _HEADER.pack(SNAPSHOT_MAGIC, FORMAT_VERSION, grid.n_modes, grid.length, state.tau,
                          _hash_bytes(manifest_hash))
    body = state.coeffs[_ascending_order(grid)].astype("<c16").tobytes()
    return header + body


def decode_snapshot(data: bytes) -> Snapshot:
    if len(data) < _HEADER.size:
        raise SnapshotFormatError("truncated header")
    magic, version, n, length, tau, digest = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    expected = _HEADER.size + 16 * n
    if len(data) != expected:
        raise SnapshotFormatError(f"expected {expected} bytes, found {len(data)}")
    try:
        grid = SpectralGrid(int(n), float(length))
    except ValueError as exc:
        raise SnapshotFormatError(str(exc)) from None
    values = np.frombuffer(data, dtype="<c16", offset=_HEADER.size, count=n)
    coeffs = np.empty(n, dtype=np.complex128)
    coeffs[_ascending_order(grid)] = values
    return Snapshot(AmplitudeState(coeffs, float(tau)), grid, digest.rstrip(b"\0").decode("ascii"), version)


def write_snapshot(path, state: AmplitudeState, grid: SpectralGrid, manifest_hash: str = "") -> Path:
    path = Path(path)
    path.write_bytes(encode_snapshot(state, grid, manifest_hash))
    return path


def read_snapshot(path) -> Snapshot:
    return decode_snapshot(Path(path).read_bytes())


def write_snapshot_csv(path, state: AmplitudeState, grid: SpectralGrid, manifest_hash: str = "") -> Path:
    path = Path(path)
    order = _ascending_order(grid)
    j = grid.j.copy()
    j[grid.nyquist] = grid.n_modes // 2
    with path.open("w", newline="") as fh:
        fh.write(f"# version={FORMAT_VERSION} n_modes={grid.n_modes} length={float(grid.length)!r} "
                 f"tau={float(state.tau)!r} manifest={manifest_hash}\n")
        out = csv.writer(fh)
        out.writerow(["j", "k_j", "re", "im"])
        for slot in order:
            c = state.coeffs[slot]
            out.writerow([int(j[slot]), repr(float(grid.dk * j[slot])), repr(float(c.real)), repr(float(c.imag))])
    return path


def read_snapshot_csv(path) -> Snapshot:
    path = Path(path)
    meta = {}
    rows = []
    with path.open() as fh:
        for line in fh:
            if line.startswith("#"):
                meta.update(part.split("=", 1) for part in line[1:].split() if "=" in part)
            else:
                rows.append(line)
    reader = csv.DictReader(rows)
    n = int(meta["n_modes"])
    grid = SpectralGrid(n, float(meta["length"]))
    coeffs = np.zeros(n, dtype=np.complex128)
    for row in reader:
        coeffs[int(row["j"]) % n] = complex(float(row["re"]), float(row["im"]))
    return Snapshot(AmplitudeState(coeffs, float(meta["tau"])), grid, meta.get("manifest", ""))


# --- field blocks --------------------------------------------------------------

def write_field_block(path, snapshot, manifest_hash: str = "") -> Path:
    """Binary dump of a :class:`surfwave.fields.FieldSnapshot`.

    Header ``(magic, version, n_theta, n_eta_plasma, n_eta_vacuum, epsilon,
    sigma, hash)``, then float64 arrays: theta, eta_plasma, eta_vacuum,
    plasma ``(5, n_eta_plasma, n_theta)``, vacuum ``(3, n_eta_vacuum,
    n_theta)`` and the interface curve (zeros when absent).
    """
    path = Path(path)
    eps = snapshot.epsilon if snapshot.epsilon is not None else float("nan")
    header = _FIELD_HEADER.pack(FIELD_MAGIC, FORMAT_VERSION, snapshot.grid_theta.size, snapshot.eta_plasma.size,
                                snapshot.eta_vacuum.size, eps, snapshot.sigma, _hash_bytes(manifest_hash))
    interface = snapshot.interface if snapshot.interface is not None else np.zeros_like(snapshot.grid_theta)
    parts = [snapshot.grid_theta, snapshot.eta_plasma, snapshot.eta_vacuum, snapshot.plasma, snapshot.vacuum,
             interface]
    path.write_bytes(header + b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in parts))
    return path


def read_field_block(path) -> dict:
    data = Path(path).read_bytes()
    magic, version, nt, npl, nvac, eps, sigma, digest = _FIELD_HEADER.unpack_from(data)
    if magic != FIELD_MAGIC or version != FORMAT_VERSION:
        raise SnapshotFormatError("not a field block")
    flat = np.frombuffer(data, dtype="<f8", offset=_FIELD_HEADER.size)
    sizes = [nt, npl, nvac, 5 * npl * nt, 3 * nvac * nt, nt]
    if flat.size != sum(sizes):
        raise SnapshotFormatError("field block size mismatch")
    chunks = np.split(flat, np.cumsum(sizes)[:-1])
    return {"theta": chunks[0], "eta_plasma": chunks[1], "eta_vacuum": chunks[2],
            "plasma": chunks[3].reshape(5, npl, nt), "vacuum": chunks[4].reshape(3, nvac, nt),
            "interface": chunks[5], "epsilon": eps, "sigma": sigma,
            "manifest_hash": digest.rstrip(b"\0").decode("ascii")}


def write_field_csv(directory, snapshot, manifest_hash: str = "") -> list[Path]:
    """One CSV per field component with columns ``theta, eta, value``."""
    from .fields import PLASMA_NAMES, VACUUM_NAMES

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    groups = [(PLASMA_NAMES, snapshot.plasma, snapshot.eta_plasma), (VACUUM_NAMES, snapshot.vacuum,
                                                                      snapshot.eta_vacuum)]
    for names, values, etas in groups:
        for i, name in enumerate(names):
            path = directory / f"field_{name}.csv"
            with path.open("w", newline="") as fh:
                fh.write(f"# manifest={manifest_hash}\n")
                out = csv.writer(fh)
                out.writerow(["theta", "eta", "value"])
                for e, row in zip(etas, values[i]):
                    for t, val in zip(snapshot.grid_theta, row):
                        out.writerow([repr(float(t)), repr(float(e)), repr(float(val))])
            written.append(path)
    return written

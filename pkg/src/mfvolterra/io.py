"""CSV, binary and JSON emission."""

import json
import struct

import numpy as np

from .errors import DomainError
from .hurst import TimeGrid

MAGIC = b"MFVL"
VERSION = 1
_HEADER = struct.Struct("<4sIII")  # magic, version, n_paths, n_times: 16 bytes


def write_ensemble_csv(path, ens):
    """One row per path, header row of grid times."""
    header = ",".join(repr(float(t)) for t in ens.grid.times)
    np.savetxt(path, ens.paths, delimiter=",", header=header, comments="", fmt="%.17g")


def read_ensemble_csv(path):
    with open(path) as fh:
        times = np.array([float(x) for x in fh.readline().strip().split(",")])
    paths = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return TimeGrid(times), paths


def write_ensemble_binary(path, ens):
    """16-byte header then the n_paths x n_times matrix in column-major float64."""
    n_paths, n_times = ens.paths.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n_paths, n_times))
        fh.write(np.asfortranarray(ens.paths, dtype="<f8").tobytes(order="F"))


def read_ensemble_binary(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise DomainError("file too short for an MFVL header")
    magic, version, n_paths, n_times = _HEADER.unpack_from(raw)
    if magic != MAGIC or version != VERSION:
        raise DomainError(f"not an MFVL v{VERSION} file")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != n_paths * n_times:
        raise DomainError("MFVL body size does not match its header")
    return body.reshape((n_paths, n_times), order="F").copy()


def write_matrix_csv(path, cov):
    """Row-major covariance matrix, header of grid times."""
    header = ",".join(repr(float(t)) for t in cov.grid.times)
    np.savetxt(path, cov.entries, delimiter=",", header=header, comments="", fmt="%.17g")


def write_local_time_csv(path, est):
    """One row per checkpoint: t, the density in each bin, then the mass sum L dx.

    The header names the bins by their left edges; the final edge is the last
    left edge plus the bin width.
    """
    header = "t," + ",".join(repr(float(x)) for x in est.x_bins[:-1]) + ",mass"
    mass = est.density @ np.diff(est.x_bins)
    rows = np.column_stack([est.t_checkpoints, est.density, mass])
    np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.17g")


def write_weighted_local_time_csv(path, wlts):
    """Columns t then one weighted local time per level; all share the checkpoints."""
    header = "t," + ",".join(f"a={w.a!r}" for w in wlts)
    rows = np.column_stack([wlts[0].t_checkpoints] + [w.values for w in wlts])
    np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.17g")


def read_ensemble(path):
    """Paths from an exported ensemble (.mfvl binary or CSV); returns (times or None, paths)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == MAGIC:
        return None, read_ensemble_binary(path)
    grid, paths = read_ensemble_csv(path)
    return grid.times, paths


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_default, allow_nan=False)
        fh.write("\n")


def dumps(payload):
    return json.dumps(payload, indent=2, sort_keys=True, default=_default, allow_nan=False)

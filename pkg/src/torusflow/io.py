"""Run outputs: time-series CSV, raw snapshots and the run manifest."""
import csv
import hashlib
import io as _io
import json
import os
import struct

import numpy as np

from .errors import UsageError

CSV_COLUMNS = ("t", "kinetic", "surface", "total", "dissipation_visc", "dissipation_ac",
               "density_ratio", "discrepancy_max", "phi_min", "phi_max",
               "interface_length", "brakke_lhs", "brakke_rhs")

SNAPSHOT_MAGIC = b"TORUSFLW"
SNAPSHOT_VERSION = 1
HEADER_BYTES = 64
_HEADER = struct.Struct("<8sqqqdd16x")


def _fmt(x):
    return repr(float(x))


def timeseries_rows(records, brakke):
    for rec, (lhs, rhs) in zip(records, brakke):
        yield [rec.t, rec.kinetic, rec.surface, rec.total, rec.dissipation_visc,
               rec.dissipation_ac, rec.density_ratio, rec.discrepancy_max,
               rec.phi_range[0], rec.phi_range[1], rec.interface_length, lhs, rhs]


def write_timeseries(path, records, brakke):
    """Write one row per record; floats use ``repr`` so values round-trip."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in timeseries_rows(records, brakke):
        writer.writerow([_fmt(x) for x in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_timeseries(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise UsageError(f"unexpected CSV header {header}")
        rows = [[float(x) for x in row] for row in reader]
    return {name: np.array([r[i] for r in rows]) for i, name in enumerate(CSV_COLUMNS)}


def write_snapshot(path, phi, u, t, eps):
    """Header then little-endian float64 fields ``phi, u_1, ..., u_d``."""
    phi = np.asarray(phi, dtype=float)
    d, N = phi.ndim, phi.shape[0]
    u = np.asarray(u, dtype=float)
    if u.shape != (d,) + phi.shape:
        raise UsageError(f"velocity shape {u.shape} does not match phi {phi.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, d, N, float(t), float(eps)))
        fh.write(phi.astype("<f8").tobytes())
        for comp in u:
            fh.write(comp.astype("<f8").tobytes())


def read_snapshot_header(path):
    with open(path, "rb") as fh:
        head = fh.read(HEADER_BYTES)
    if len(head) != HEADER_BYTES:
        raise UsageError(f"{path}: truncated header")
    magic, version, d, N, t, eps = _HEADER.unpack(head)
    if magic != SNAPSHOT_MAGIC:
        raise UsageError(f"{path}: not a snapshot file")
    if version != SNAPSHOT_VERSION:
        raise UsageError(f"{path}: unsupported snapshot version {version}")
    return {"version": version, "d": d, "N": N, "t": t, "eps": eps}


def read_snapshot(path):
    """Returns ``(phi, u, header)``."""
    head = read_snapshot_header(path)
    d, N = head["d"], head["N"]
    shape = (N,) * d
    data = np.fromfile(path, dtype="<f8", offset=HEADER_BYTES)
    if data.size != (d + 1) * N ** d:
        raise UsageError(f"{path}: expected {(d + 1) * N ** d} values, found {data.size}")
    fields = data.reshape((d + 1,) + shape).astype(float)
    return fields[0], fields[1:], head


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(directory, config_text, version, started, finished, status, files,
                   error="", name="manifest.json"):
    """Write the manifest atomically (temporary file, then rename)."""
    inventory = [{"file": f, "bytes": os.path.getsize(os.path.join(directory, f)),
                  "sha256": sha256(os.path.join(directory, f))} for f in files]
    doc = {"config": config_text, "version": version, "started": started,
           "finished": finished, "status": status, "error": error, "files": inventory}
    path = os.path.join(directory, name)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)
    return path

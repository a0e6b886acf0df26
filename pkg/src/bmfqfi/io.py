"""CSV and manifest writing. Reals use 17 significant digits so values
round-trip exactly."""
import csv
import hashlib
import os

import numpy as np

MANIFEST = "manifest.csv"


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, columns):
    """Write ``columns`` (ordered mapping name -> 1-d sequence) to ``path``.

    Returns the number of data rows.
    """
    names = list(columns)
    cols = [np.asarray(columns[k]) if not isinstance(columns[k], list) else columns[k]
            for k in names]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("all CSV columns must have the same length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(names)
        for i in range(n):
            w.writerow([format_value(c[i]) for c in cols])
    return n


def write_rows(path, header, rows):
    """Write an iterable of row tuples under ``header``."""
    rows = list(rows)
    return write_csv(path, {h: [r[i] for r in rows] for i, h in enumerate(header)})


def _column(values):
    try:
        return np.array([float(v) for v in values])
    except ValueError:
        return np.array(values)


def read_csv(path):
    """Columns of a CSV written by :func:`write_csv`: float arrays, or
    string arrays for columns that are not numeric."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [row for row in r if row]
    return {h: _column([row[i] for row in rows]) for i, h in enumerate(header)}


def write_text(path, pairs):
    """key=value lines, one per entry."""
    with open(path, "w") as fh:
        for k, v in pairs.items():
            fh.write(f"{k}={format_value(v)}\n")


def config_hash(values):
    """SHA-256 of the canonical ``key=value`` listing of a resolved config."""
    text = "\n".join(f"{k}={format_value(values[k])}" for k in sorted(values))
    return hashlib.sha256(text.encode()).hexdigest()


class Manifest:
    """Collects (file, status, rows) entries and writes them with the config hash."""

    def __init__(self, out_dir, digest):
        self.out_dir = out_dir
        self.digest = digest
        self.entries = []

    def add(self, name, rows, status="OK", detail=""):
        self.entries.append((name, status, rows, detail))

    def csv(self, name, columns):
        rows = write_csv(os.path.join(self.out_dir, name), columns)
        self.add(name, rows)
        return rows

    def text(self, name, pairs):
        write_text(os.path.join(self.out_dir, name), pairs)
        self.add(name, len(pairs))

    def write(self, failed=None):
        """Write the manifest; ``failed`` is an error message marking the run FAILED."""
        rows = [(n, self.digest, s, r, d) for n, s, r, d in self.entries]
        if failed is not None:
            rows.append(("-", self.digest, "FAILED", 0, failed))
        header = ("file", "config_hash", "status", "rows", "detail")
        write_rows(os.path.join(self.out_dir, MANIFEST), header, rows)

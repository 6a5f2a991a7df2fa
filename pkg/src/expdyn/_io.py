"""CSV/JSON helpers shared by the record types."""

import csv
import json
import math


def stamp_line(stamp):
    """Reproducibility comment placed above every CSV header."""
    return "# " + " ".join(f"{k}={v}" for k, v in stamp.items())


def write_csv(fh, header, rows, stamp=None):
    fh.write(stamp_line(stamp or {}) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])


def read_csv(fh):
    """Return (stamp dict, header, rows as strings)."""
    first = fh.readline()
    stamp = {}
    if first.startswith("#"):
        for tok in first[1:].split():
            k, _, v = tok.partition("=")
            stamp[k] = v
    else:
        fh.seek(0)
    r = csv.reader(fh)
    header = next(r)
    return stamp, header, list(r)


def _cell(v):
    # float() also strips numpy scalar types, whose repr is not a plain number
    if isinstance(v, float):
        return repr(float(v))
    return v


def pair(z):
    z = complex(z)
    return [z.real, z.imag]


def unpair(p):
    return complex(p[0], p[1])


def _sanitize(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def dumps(obj, **kw):
    """JSON with non-finite floats written as strings ("inf", "-inf", "nan")."""
    return json.dumps(_sanitize(obj), **kw)

"""Grid scans over the parameter plane or the dynamical plane.

Pixels are processed in fixed blocks of rows.  The decomposition depends only
on the job, never on the number of workers, and blocks are reassembled in row
order, so the output bytes are the same for any pool size.

Pixel (i, j) sits at the centre of its cell::

    re = re_min + (j + 0.5) * (re_max - re_min) / width
    im = im_max - (i + 0.5) * (im_max - im_min) / height

so row 0 is the top (largest imaginary part).
"""

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _io
from .classify import CASE_CODES, CASES_BY_CODE, DEFAULT_THRESHOLDS, Thresholds, assign_case
from .errors import ScanLimitError
from .logcplx import NATIVE_LOG_LIMIT

PARAM = "param-classify"
DYNAMICAL = "dynamical-escape"
MODES = (PARAM, DYNAMICAL)

DEFAULT_MAX_PIXELS = 4_000_000
BLOCK_ROWS = 8
CONFIRMATIONS = 3

#: case code -> RGB
CASE_PALETTE = {
    0: (128, 128, 128),   # Indeterminate
    1: (40, 90, 200),     # DerivativeToZero
    2: (240, 200, 60),    # SubseqToInfinity
    3: (200, 40, 60),     # BoundedAwayCandidate
}
#: colour of points that never escape within the horizon (dynamical mode)
BOUNDED_RGB = (0, 0, 0)


@dataclass(frozen=True)
class ScanJob:
    region: tuple            # (re_min, re_max, im_min, im_max)
    width: int
    height: int
    mode: str = PARAM
    horizon: int = 200
    lam: complex = 1 + 0j    # only used in dynamical mode
    thresholds: Thresholds = DEFAULT_THRESHOLDS
    max_pixels: int = DEFAULT_MAX_PIXELS

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown scan mode {self.mode!r}; expected one of {MODES}")
        if self.width < 1 or self.height < 1:
            raise ScanLimitError("resolution must be at least 1x1")
        if self.width * self.height > self.max_pixels:
            raise ScanLimitError(f"{self.width}x{self.height} exceeds the cap of "
                                 f"{self.max_pixels} pixels")
        r0, r1, i0, i1 = (float(v) for v in self.region)
        if not all(math.isfinite(v) for v in (r0, r1, i0, i1)):
            raise ScanLimitError("region bounds must be finite")
        if not (r1 > r0 and i1 > i0):
            raise ScanLimitError(f"degenerate region {self.region}")
        if self.horizon < 20:
            raise ValueError("horizon must be >= 20")
        if self.mode == DYNAMICAL and complex(self.lam) == 0:
            raise ValueError("lambda must be nonzero")

    def stamp(self):
        s = {"mode": self.mode, "region": ",".join(repr(float(v)) for v in self.region),
             "width": self.width, "height": self.height, "horizon": self.horizon}
        if self.mode == DYNAMICAL:
            lam = complex(self.lam)
            s["lambda"] = f"{lam.real!r}{lam.imag:+.17g}i"
        s.update(self.thresholds.as_dict())
        return s


@dataclass
class ScanResult:
    job: ScanJob
    codes: np.ndarray = field(repr=False)     # (height, width) int
    coords: np.ndarray = field(repr=False)    # (height, width) complex

    def rgb(self):
        if self.job.mode == PARAM:
            lut = np.array([CASE_PALETTE[k] for k in sorted(CASE_PALETTE)], dtype=np.uint8)
            return lut[self.codes]
        return _escape_colors(self.codes, self.job.horizon)

    def ppm_bytes(self):
        h, w = self.codes.shape
        return f"P6\n{w} {h}\n255\n".encode("ascii") + self.rgb().tobytes()

    def csv_text(self):
        buf = io.StringIO()
        label = "case_code" if self.job.mode == PARAM else "escape_step"
        rows = []
        for i in range(self.codes.shape[0]):
            for j in range(self.codes.shape[1]):
                c = self.coords[i, j]
                rows.append((i, j, float(c.real), float(c.imag), int(self.codes[i, j])))
        _io.write_csv(buf, ["row", "col", "re", "im", label], rows, self.job.stamp())
        return buf.getvalue()

    def case_counts(self):
        if self.job.mode != PARAM:
            raise ValueError("case counts only exist for parameter scans")
        return {CASES_BY_CODE[k]: int(np.count_nonzero(self.codes == k)) for k in CASES_BY_CODE}


def _escape_colors(steps, horizon):
    """Escape steps -> RGB; 0 (no escape) is black, fast escapes are bright."""
    t = np.where(steps > 0, 1.0 - np.log1p(steps) / math.log1p(horizon), 0.0)
    rgb = np.empty(steps.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = np.round(255 * t)
    rgb[..., 1] = np.round(255 * t ** 2)
    rgb[..., 2] = np.round(255 * np.sqrt(t))
    rgb[steps == 0] = BOUNDED_RGB
    return rgb


def coordinates(job, rows=None):
    r0, r1, i0, i1 = (float(v) for v in job.region)
    rows = np.arange(job.height) if rows is None else np.asarray(rows)
    cols = np.arange(job.width)
    re = r0 + (cols + 0.5) * (r1 - r0) / job.width
    im = i1 - (rows + 0.5) * (i1 - i0) / job.height
    return re[None, :] + 1j * im[:, None]


def _iterate(lam, z0, horizon, escape_log):
    """Vectorized orbit with the same escape rule as :func:`expdyn.orbit.step`.

    Returns the point history (NaN once escaped or beyond the native range),
    the log-modulus history of ``(f^n)'(z0)`` and the escape step (0 = none).
    """
    lam = np.broadcast_to(np.asarray(lam, dtype=complex), z0.shape)
    n_pix = z0.size
    lam = lam.ravel().copy()
    with np.errstate(divide="ignore"):
        log_lam = np.log(np.abs(lam))
    z = z0.ravel().astype(complex)
    hist = np.full((horizon + 1, n_pix), np.nan + 0j)
    L = np.full((horizon + 1, n_pix), np.nan)
    hist[0] = z
    L[0] = 0.0
    esc = np.zeros(n_pix, dtype=np.int64)
    alive = np.ones(n_pix, dtype=bool)
    far = np.zeros(n_pix, dtype=bool)
    with np.errstate(all="ignore"):
        for n in range(1, horizon + 1):
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            w = lam[idx] * z[idx]
            bad = (far[idx] | ~np.isfinite(w.real) | ~np.isfinite(w.imag)
                   | (np.log(np.abs(w)) > escape_log))
            gone = idx[bad]
            esc[gone] = n
            alive[gone] = False
            keep = idx[~bad]
            wk = w[~bad]
            L[n, keep] = L[n - 1, keep] + log_lam[keep] + wk.real
            big = wk.real >= NATIVE_LOG_LIMIT
            far[keep[big]] = True
            ok = keep[~big]
            z[ok] = np.exp(wk[~big])
            hist[n, ok] = z[ok]
    return hist, L, esc


def _periods(hist, tol, max_period):
    """Smallest p with |z_n - z_{n-p}| < tol for the last three n (0 = none)."""
    H = hist.shape[0] - 1
    out = np.zeros(hist.shape[1], dtype=np.int64)
    with np.errstate(invalid="ignore"):
        for p in range(min(max_period, H - CONFIRMATIONS + 1), 0, -1):
            ok = np.ones(hist.shape[1], dtype=bool)
            for c in range(CONFIRMATIONS):
                ok &= np.abs(hist[H - c] - hist[H - c - p]) < tol
            out[ok] = p
    return out


def _param_block(job, rows):
    lams = coordinates(job, rows)
    th = job.thresholds
    hist, L, esc = _iterate(lams, np.ones(lams.shape, dtype=complex), job.horizon,
                            th.escape_log_threshold)
    per = _periods(hist, th.cycle_tol, th.max_period)
    codes = np.empty(lams.size, dtype=np.int64)
    for k in range(lams.size):
        if esc[k]:
            codes[k] = CASE_CODES[assign_case((), True)]
            continue
        case = assign_case(L[:, k], False, int(per[k]) or 1, th)
        codes[k] = CASE_CODES[case]
    return codes.reshape(lams.shape)


def _dynamical_block(job, rows):
    zs = coordinates(job, rows)
    _, _, esc = _iterate(complex(job.lam), zs, job.horizon,
                         job.thresholds.escape_log_threshold)
    return esc.reshape(zs.shape)


def _run_block(args):
    job, start, stop = args
    rows = np.arange(start, stop)
    if job.mode == PARAM:
        return start, _param_block(job, rows)
    return start, _dynamical_block(job, rows)


def worker_count(requested=None):
    """Workers for a scan, capped by the EXPDYN_THREADS environment variable."""
    n = requested if requested else (os.cpu_count() or 1)
    env = os.environ.get("EXPDYN_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"EXPDYN_THREADS must be an integer, got {env!r}") from None
        if cap >= 1:
            n = min(n, cap)
    return max(1, int(n))


def run_scan(job, workers=1, block_rows=BLOCK_ROWS):
    job.validate()
    tasks = [(job, s, min(s + block_rows, job.height))
             for s in range(0, job.height, block_rows)]
    codes = np.zeros((job.height, job.width), dtype=np.int64)
    if workers <= 1 or len(tasks) == 1:
        results = map(_run_block, tasks)
        for start, block in results:
            codes[start:start + block.shape[0]] = block
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for start, block in ex.map(_run_block, tasks):
                codes[start:start + block.shape[0]] = block
    return ScanResult(job, codes, coordinates(job))


def write_outputs(result, image_path, csv_path=None):
    with open(image_path, "wb") as fh:
        fh.write(result.ppm_bytes())
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            fh.write(result.csv_text())


def thresholds_from(mapping):
    """Thresholds from a dict of overrides (unknown keys are rejected)."""
    known = asdict(DEFAULT_THRESHOLDS)
    extra = set(mapping) - set(known)
    if extra:
        raise ValueError(f"unknown threshold keys: {sorted(extra)}")
    return Thresholds(**{**known, **mapping})

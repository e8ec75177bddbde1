"""Seeded multi-trial benchmark over image size, compression ratio, sensing kind and solver."""

from __future__ import annotations

import csv
import hashlib
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .acquisition import acquire_scan, add_awgn, gen_bernoulli_k, gen_gaussian_complex, m_for_cr
from .baselines import IstaOptions, solve_ista_columnwise
from .bsbl import SolveOptions, solve_bmmv
from .core import snr_db
from .errors import EmptyInput, FormatError, InvalidSpec, ScanThzError
from .phantoms import PhantomSpec, Shape, builtin_spec, gen_phantom

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SOLVERS = ("bsbl", "bsbl-dft", "ista", "ista-dft")
RECORD_HEADER = ("solver", "n", "cr", "matrix_kind", "trial", "seed", "snr_db", "wall_time_s", "failed")
COST_SLACK = 1e-8


def parse_matrix_kind(kind: str):
    """``"gaussian"`` or ``"bernoulli-<k>"`` -> ``("gaussian", None)`` / ``("bernoulli", k)``."""
    if kind == "gaussian":
        return "gaussian", None
    if kind.startswith("bernoulli-"):
        try:
            k = int(kind.split("-", 1)[1])
        except ValueError:
            pass
        else:
            if k >= 1:
                return "bernoulli", k
    raise InvalidSpec(f"matrix kind {kind!r} must be 'gaussian' or 'bernoulli-<k>'")


def make_sensing(kind: str, m: int, n: int, seed: int):
    name, k = parse_matrix_kind(kind)
    if name == "gaussian":
        return gen_gaussian_complex(m, n, seed)
    return gen_bernoulli_k(m, n, k, seed)


def run_solver(solver: str, y, phi, block_size=4, eta=1e-4, beta_scale=0.01):
    """Dispatch one solve by benchmark solver id."""
    if solver not in SOLVERS:
        raise InvalidSpec(f"unknown solver {solver!r}; valid solvers: {', '.join(SOLVERS)}")
    transform = "dft" if solver.endswith("-dft") else "none"
    if solver.startswith("bsbl"):
        opts = SolveOptions(block_size=block_size, eta=eta, beta_scale=beta_scale, transform=transform)
        return solve_bmmv(y, phi, opts)
    return solve_ista_columnwise(y, phi, IstaOptions(transform=transform))


def cost_violations(trajectory, slack=COST_SLACK) -> int:
    """Number of steps where the cost rose by more than ``slack * (1 + |L|)``."""
    t = np.asarray(trajectory, dtype=float)
    if t.size < 2:
        return 0
    return int(np.sum(t[1:] - t[:-1] > slack * (1.0 + np.abs(t[:-1]))))


@dataclass(frozen=True)
class BenchConfig:
    trials: int = 50
    sizes: tuple = (64,)
    crs: tuple = (0.5, 0.7, 0.9)
    matrix_kinds: tuple = ("gaussian",)
    solvers: tuple = ("bsbl-dft",)
    base_seed: int = 0
    block_size: int = 4
    phantom: str = "s0"
    eta: float = 1e-4
    beta_scale: float = 0.01
    noise_snr_db: float = math.inf
    workers: int = 1
    custom_phantom: PhantomSpec | None = None

    def validate(self):
        if self.trials < 1:
            raise InvalidSpec("trials must be >= 1")
        if not self.sizes or any(n < 8 for n in self.sizes):
            raise InvalidSpec("sizes must be a non-empty list of integers >= 8")
        if not self.crs or any(not 0.0 <= cr < 1.0 for cr in self.crs):
            raise InvalidSpec("every CR must lie in [0, 1)")
        for kind in self.matrix_kinds:
            parse_matrix_kind(kind)
        for s in self.solvers:
            if s not in SOLVERS:
                raise InvalidSpec(f"unknown solver {s!r}; valid solvers: {', '.join(SOLVERS)}")
        if self.block_size < 1 or self.workers < 1:
            raise InvalidSpec("block_size and workers must be >= 1")
        if self.custom_phantom is None:
            builtin_spec(self.phantom)
        return self

    def phantom_spec(self, n):
        if self.custom_phantom is not None:
            return replace(self.custom_phantom, size=n)
        return builtin_spec(self.phantom, n)


@dataclass
class ResultRecord:
    solver: str
    n: int
    cr: float
    matrix_kind: str
    trial: int
    seed: int
    snr_db: float
    wall_time_s: float
    failed: bool = False
    cost_violations: int = field(default=0, compare=False)
    error: str = field(default="", compare=False)

    def row(self):
        snr = "nan" if math.isnan(self.snr_db) else ("inf" if math.isinf(self.snr_db) else repr(self.snr_db))
        return [self.solver, self.n, repr(self.cr), self.matrix_kind, self.trial, self.seed, snr,
                repr(self.wall_time_s), int(self.failed)]


def cell_seed(base_seed: int, phantom: str, n: int, cr: float, kind: str, trial: int) -> int:
    """Stable 64-bit seed for one trial; every solver in the trial sees the same matrix."""
    key = f"{base_seed}|{phantom}|{n}|{cr!r}|{kind}|{trial}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def _run_trial(cfg: BenchConfig, n: int, cr: float, kind: str, trial: int):
    name = cfg.custom_phantom.name if cfg.custom_phantom is not None else cfg.phantom
    seed = cell_seed(cfg.base_seed, name, n, cr, kind, trial)
    x = gen_phantom(cfg.phantom_spec(n), seed)
    m = m_for_cr(n, cr)
    records = []
    try:
        phi = make_sensing(kind, m, n, seed)
        y = acquire_scan(phi, x)
        if math.isfinite(cfg.noise_snr_db):
            y = add_awgn(y, cfg.noise_snr_db, seed ^ 0x5EED)
    except ScanThzError as exc:
        return [ResultRecord(s, n, cr, kind, trial, seed, math.nan, 0.0, True, error=str(exc)) for s in cfg.solvers]
    for solver in cfg.solvers:
        try:
            rep = run_solver(solver, y, phi, cfg.block_size, cfg.eta, cfg.beta_scale)
        except (ScanThzError, ArithmeticError, np.linalg.LinAlgError) as exc:
            records.append(ResultRecord(solver, n, cr, kind, trial, seed, math.nan, 0.0, True, error=str(exc)))
            continue
        viol = cost_violations(rep.cost_trajectory) if solver.startswith("bsbl") else 0
        records.append(ResultRecord(solver, n, cr, kind, trial, seed, snr_db(x, rep.estimate), rep.wall_time,
                                    cost_violations=viol))
    return records


def run_benchmark(cfg: BenchConfig, progress=None) -> list:
    """Run every (size, CR, kind, trial) cell for every solver.

    Records come back ordered by (n, cr, kind, trial, solver-as-configured)
    regardless of ``cfg.workers``.
    """
    cfg.validate()
    cells = [(n, cr, kind, t) for n in cfg.sizes for cr in cfg.crs for kind in cfg.matrix_kinds
             for t in range(cfg.trials)]
    out = []
    if cfg.workers == 1:
        for i, cell in enumerate(cells):
            out.extend(_run_trial(cfg, *cell))
            if progress:
                progress(i + 1, len(cells))
    else:
        with ProcessPoolExecutor(cfg.workers) as pool:
            futures = [pool.submit(_run_trial, cfg, *cell) for cell in cells]
            for i, fut in enumerate(futures):
                out.extend(fut.result())
                if progress:
                    progress(i + 1, len(cells))
    return out


@dataclass
class SummaryRow:
    solver: str
    n: int
    cr: float
    matrix_kind: str
    mean_snr_db: float
    mean_wall_time_s: float
    success_rate: float
    trials: int
    speedup: float


def summarize(records, reference=None) -> list:
    """Per-cell means over successful trials.

    ``speedup`` is the solver's mean time divided by the reference solver's
    mean time in the same cell (first ``bsbl*`` solver unless given).
    """
    records = list(records)
    if not records:
        raise EmptyInput("no records to summarize")
    order = []
    groups = {}
    for r in records:
        key = (r.solver, r.n, r.cr, r.matrix_kind)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    if reference is None:
        reference = next((k[0] for k in order if k[0].startswith("bsbl")), None)
    means = {}
    for key in order:
        ok = [r for r in groups[key] if not r.failed]
        snr = float(np.mean([r.snr_db for r in ok])) if ok else math.nan
        wall = float(np.mean([r.wall_time_s for r in ok])) if ok else math.nan
        means[key] = (snr, wall, len(ok) / len(groups[key]), len(groups[key]))
    rows = []
    for key in order:
        snr, wall, rate, count = means[key]
        ref = means.get((reference,) + key[1:])
        speed = wall / ref[1] if ref is not None and ref[1] and ref[1] > 0 else math.nan
        rows.append(SummaryRow(*key, snr, wall, rate, count, speed))
    return rows


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def _num(s):
    return float(s)


def records_from_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != RECORD_HEADER:
        raise FormatError(f"record CSV must start with header {','.join(RECORD_HEADER)}")
    out = []
    for r in rows[1:]:
        out.append(ResultRecord(r[0], int(r[1]), float(r[2]), r[3], int(r[4]), int(r[5]), _num(r[6]),
                                float(r[7]), bool(int(r[8]))))
    return out


SUMMARY_HEADER = ("solver", "n", "cr", "matrix_kind", "mean_snr_db", "mean_wall_time_s", "success_rate",
                  "trials", "speedup")


def summary_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in rows:
        w.writerow([getattr(r, f.name) for f in fields(SummaryRow)])
    return buf.getvalue()


def format_table(rows) -> str:
    """Human-readable aligned summary table."""
    body = [
        [r.solver, str(r.n), f"{r.cr:.2f}", r.matrix_kind, f"{r.mean_snr_db:.2f}", f"{r.mean_wall_time_s:.4f}",
         f"{r.success_rate:.2f}", str(r.trials), f"{r.speedup:.2f}"]
        for r in rows
    ]
    head = ["solver", "n", "cr", "matrix", "snr_db", "time_s", "success", "trials", "speedup"]
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(head)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines)


# -- config files -----------------------------------------------------------

_BENCH_KEYS = {
    "trials": int, "sizes": list, "crs": list, "matrix_kinds": list, "solvers": list, "base_seed": int,
    "block_size": int, "phantom": str, "eta": float, "beta_scale": float, "noise_snr_db": float, "workers": int,
}


def _field(table, key, typ, where):
    val = table[key]
    if typ is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, typ) or isinstance(val, bool):
        raise FormatError(f"field '{where}.{key}': expected {typ.__name__}, got {type(val).__name__}")
    return val


def _amplitude(val, where):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return complex(val)
    if isinstance(val, list) and len(val) == 2 and all(isinstance(v, (int, float)) for v in val):
        return complex(val[0], val[1])
    raise FormatError(f"field '{where}.amplitude': expected a number or [re, im]")


def phantom_from_table(table, where="phantom") -> PhantomSpec:
    if "name" in table and table["name"] in ("s0", "s1", "s2") and "shapes" not in table:
        return builtin_spec(table["name"], int(table.get("size", 64)), float(table.get("blur_sigma", 1.5)))
    shapes = []
    for i, st in enumerate(table.get("shapes", [])):
        w = f"{where}.shapes[{i}]"
        for key in ("kind", "center", "extent"):
            if key not in st:
                raise FormatError(f"field '{w}.{key}': missing")
        if "phase" in st:
            amp = complex(math.cos(st["phase"]), math.sin(st["phase"]))
        else:
            amp = _amplitude(st.get("amplitude", 1.0), w)
        shapes.append(Shape(st["kind"], tuple(float(c) for c in st["center"]), float(st["extent"]), amp,
                            float(st.get("aspect", 1.0))))
    spec = PhantomSpec(str(table.get("name", "custom")), int(table.get("size", 64)), tuple(shapes),
                       float(table.get("blur_sigma", 1.5)))
    try:
        spec.validate()
    except InvalidSpec as exc:
        raise FormatError(f"section '{where}': {exc}") from exc
    return spec


def load_config(text: str) -> BenchConfig:
    """Parse a TOML benchmark config (``[bench]`` plus optional ``[phantom]``)."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(f"config parse error: {exc}") from exc
    bench = doc.get("bench", {})
    unknown = set(bench) - set(_BENCH_KEYS)
    if unknown:
        raise FormatError(f"unknown field(s) in [bench]: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, typ in _BENCH_KEYS.items():
        if key in bench:
            val = _field(bench, key, typ, "bench")
            if typ is list:
                if key in ("sizes",):
                    val = tuple(int(v) for v in val)
                elif key == "crs":
                    val = tuple(float(v) for v in val)
                else:
                    val = tuple(str(v) for v in val)
            kwargs[key] = val
    if "phantom" in doc:
        kwargs["custom_phantom"] = phantom_from_table(doc["phantom"])
    cfg = BenchConfig(**kwargs)
    try:
        return cfg.validate()
    except InvalidSpec as exc:
        raise FormatError(f"section 'bench': {exc}") from exc

"""Configuration parsing, run orchestration and artifact emission.

Configs are JSON documents; see the README for the full key reference.
A run writes report.json, iterations.csv, labels.pgm and a config echo
into the output directory (overridable with the PHASEPART_OUTDIR
environment variable).  All file writes go through a temp-then-rename so
readers never observe partial artifacts.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys as _sys
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .anisotropy import Anisotropy, DensityWeighted, make_anisotropy
from .energy import DoubleWell, sharp_energy
from .grid import (Grid, Labels, make_disk_mask, make_hexagon_mask,
                   make_triangle_mask)
from .optimizer import (ContinuationSchedule, Problem, RunReport, SmoothingContinuation,
                        Stage, make_schedule, run_continuation)
from .profile import Profile, profile_energy_1d

OUTDIR_ENV = "PHASEPART_OUTDIR"

PROBLEMS = ("isoperimetric", "partition", "weighted_isoperimetric")
DOMAINS = ("square", "disk", "triangle", "hexagon", "mask_file")
BOUNDARIES = ("neumann", "periodic")
INITS = ("iid", "coarse", "labels")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(Exception):
    """Carries the list of precise validation errors (key path + message)."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    problem: str
    phases: int
    domain: dict
    boundary: str
    pin_boundary: bool
    anisotropy: dict
    well: dict
    mass: dict
    density: Optional[dict]
    schedule: dict
    eps_band_override: bool
    smoothing: Optional[dict]
    init: dict
    seed: int
    max_iters: int
    grad_tol: float
    step0: float
    output_dir: str

    def to_dict(self) -> dict:
        out = {
            "problem": self.problem,
            "phases": self.phases,
            "domain": self.domain,
            "boundary": self.boundary,
            "pin_boundary": self.pin_boundary,
            "anisotropy": self.anisotropy,
            "well": self.well,
            "mass": self.mass,
            "schedule": self.schedule,
            "eps_band_override": self.eps_band_override,
            "init": self.init,
            "seed": self.seed,
            "max_iters": self.max_iters,
            "grad_tol": self.grad_tol,
            "step0": self.step0,
            "output_dir": self.output_dir,
        }
        if self.density is not None:
            out["density"] = self.density
        if self.smoothing is not None:
            out["smoothing"] = self.smoothing
        return out


_KNOWN_KEYS = {"problem", "phases", "domain", "boundary", "pin_boundary", "anisotropy",
               "well", "mass", "density", "schedule", "eps_band_override", "smoothing",
               "init", "seed", "max_iters", "grad_tol", "step0", "output_dir"}


def _check_anisotropy(spec: dict, errors: list) -> None:
    kind = spec.get("kind")
    try:
        build_anisotropy(spec)
    except KeyError as e:
        errors.append(f"anisotropy: missing parameter {e} for kind {kind!r}")
    except (ValueError, TypeError) as e:
        errors.append(f"anisotropy: {e}")


def _check_domain(spec: dict, errors: list) -> None:
    kind = spec.get("type")
    if kind not in DOMAINS:
        errors.append(f"domain.type: {kind!r} is not one of {DOMAINS}")
        return
    if kind == "disk" or kind == "hexagon":
        if not isinstance(spec.get("radius"), (int, float)) or spec["radius"] <= 0:
            errors.append(f"domain.radius: must be a positive number")
        if "center" in spec and (not isinstance(spec["center"], list) or len(spec["center"]) != 2):
            errors.append("domain.center: must be [x, y]")
    elif kind == "triangle":
        verts = spec.get("vertices")
        if not isinstance(verts, list) or len(verts) != 3:
            errors.append("domain.vertices: triangle needs exactly 3 [x, y] pairs")
    elif kind == "mask_file":
        if not isinstance(spec.get("path"), str):
            errors.append("domain.path: mask_file needs a path string")


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a JSON config; raises ConfigError listing
    every violation with its offending key path."""
    errors: list[str] = []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"not valid JSON: {e}"])
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])

    for key in raw:
        if key not in _KNOWN_KEYS:
            errors.append(f"{key}: unknown key")

    problem = raw.get("problem")
    if problem not in PROBLEMS:
        errors.append(f"problem: {problem!r} is not one of {PROBLEMS}")
        problem = "isoperimetric"

    phases = raw.get("phases", 1 if problem != "partition" else None)
    if problem == "partition":
        if not isinstance(phases, int) or phases < 2:
            errors.append("phases: partition problems need an integer >= 2")
            phases = 2
    else:
        if phases is None:
            phases = 1
        if phases != 1:
            errors.append(f"phases: {problem} problems are single-phase")
            phases = 1

    domain = raw.get("domain", {"type": "square"})
    if not isinstance(domain, dict):
        errors.append("domain: must be an object")
        domain = {"type": "square"}
    else:
        _check_domain(domain, errors)

    boundary = raw.get("boundary", "neumann")
    if boundary not in BOUNDARIES:
        errors.append(f"boundary: {boundary!r} is not one of {BOUNDARIES}")
        boundary = "neumann"
    if boundary == "periodic" and domain.get("type", "square") != "square":
        errors.append("boundary: periodic runs require the full square domain")

    pin_default = problem != "partition" and boundary == "neumann"
    pin_boundary = raw.get("pin_boundary", pin_default)
    if not isinstance(pin_boundary, bool):
        errors.append("pin_boundary: must be a boolean")
        pin_boundary = pin_default
    if pin_boundary and problem == "partition":
        errors.append("pin_boundary: cannot pin the boundary in partition mode")
    if pin_boundary and boundary == "periodic":
        errors.append("pin_boundary: meaningless on a periodic grid")

    aniso = raw.get("anisotropy", {"kind": "euclidean"})
    if not isinstance(aniso, dict) or "kind" not in aniso:
        errors.append("anisotropy: must be an object with a 'kind'")
        aniso = {"kind": "euclidean"}
    else:
        _check_anisotropy(aniso, errors)

    well = raw.get("well", {"kind": "quartic"})
    if not isinstance(well, dict) or well.get("kind", "quartic") != "quartic":
        errors.append("well.kind: only the default 'quartic' well is configurable")
        well = {"kind": "quartic"}

    mass = raw.get("mass")
    if not isinstance(mass, dict):
        errors.append("mass: required object with fraction(s) or target(s)")
        mass = {"fraction": 0.5}
    else:
        keys = set(mass) & {"fraction", "fractions", "target", "targets"}
        if len(keys) != 1:
            errors.append("mass: give exactly one of fraction, fractions, target, targets")
        elif problem == "partition":
            if "fractions" in mass:
                fr = mass["fractions"]
                if not isinstance(fr, list) or len(fr) != phases:
                    errors.append(f"mass.fractions: need one fraction per phase ({phases})")
                elif any(not isinstance(x, (int, float)) or x <= 0 for x in fr):
                    errors.append("mass.fractions: fractions must be positive numbers")
                elif abs(sum(fr) - 1.0) > 1e-9:
                    errors.append("mass.fractions: mass fractions must sum to 1")
            elif "targets" not in mass:
                errors.append("mass: partition problems take fractions or targets")
            else:
                tg = mass["targets"]
                if not isinstance(tg, list) or len(tg) != phases:
                    errors.append(f"mass.targets: need one target per phase ({phases})")
        else:
            if "fraction" in mass:
                f = mass["fraction"]
                if not isinstance(f, (int, float)) or not (0.0 < f < 1.0):
                    errors.append("mass.fraction: must lie strictly between 0 and 1")
            elif "target" in mass:
                if not isinstance(mass["target"], (int, float)) or mass["target"] <= 0:
                    errors.append("mass.target: must be positive")
            else:
                errors.append(f"mass: {problem} problems take a single fraction or target")

    density = raw.get("density")
    if problem == "weighted_isoperimetric":
        if not isinstance(density, dict):
            errors.append("density: required for weighted_isoperimetric")
        else:
            dk = density.get("kind")
            if dk == "uniform":
                if not isinstance(density.get("value"), (int, float)) or density["value"] <= 0:
                    errors.append("density.value: must be positive")
            elif dk == "disk_step":
                for key in ("inside", "outside", "radius"):
                    if not isinstance(density.get(key), (int, float)) or density[key] <= 0:
                        errors.append(f"density.{key}: must be positive")
                if "center" in density and (not isinstance(density["center"], list)
                                            or len(density["center"]) != 2):
                    errors.append("density.center: must be [x, y]")
            else:
                errors.append(f"density.kind: {dk!r} is not one of ('uniform', 'disk_step')")
    elif density is not None:
        errors.append("density: only used by weighted_isoperimetric")

    schedule = raw.get("schedule")
    eps_band_override = bool(raw.get("eps_band_override", False))
    if not isinstance(schedule, dict) or not ({"stages", "auto"} & set(schedule)):
        errors.append("schedule: required object with 'stages' or 'auto'")
        schedule = {"stages": [{"n": 65, "eps": 4.0 / 65}]}
    elif "stages" in schedule:
        if not isinstance(schedule["stages"], list) or not schedule["stages"]:
            errors.append("schedule.stages: must be a nonempty list")
        else:
            prev = None
            for k, st in enumerate(schedule["stages"]):
                if not isinstance(st, dict) or "n" not in st or "eps" not in st:
                    errors.append(f"schedule.stages[{k}]: needs keys n and eps")
                    continue
                n, eps = st["n"], st["eps"]
                if not isinstance(n, int) or n < 2:
                    errors.append(f"schedule.stages[{k}].n: must be an integer >= 2")
                    continue
                if not isinstance(eps, (int, float)) or eps <= 0:
                    errors.append(f"schedule.stages[{k}].eps: must be positive")
                    continue
                if not eps_band_override and not (1.0 / n <= eps <= 4.0 / n):
                    errors.append(
                        f"schedule.stages[{k}].eps: {eps:.6g} outside the admissible band "
                        f"[1/N, 4/N] = [{1.0 / n:.6g}, {4.0 / n:.6g}] "
                        "(set eps_band_override to force it)")
                if prev is not None:
                    if n < prev[0]:
                        errors.append(f"schedule.stages[{k}].n: grids must be nondecreasing")
                    if eps > prev[1]:
                        errors.append(f"schedule.stages[{k}].eps: must be nonincreasing")
                prev = (n, eps)
    else:
        auto = schedule["auto"]
        if not isinstance(auto, dict) or not isinstance(auto.get("n0"), int) \
                or not isinstance(auto.get("stages"), int):
            errors.append("schedule.auto: needs integer n0 and stages")

    smoothing = raw.get("smoothing")
    if smoothing is not None:
        if not isinstance(smoothing, dict):
            errors.append("smoothing: must be an object")
        else:
            for key in ("first_stage", "later_stages"):
                seq = smoothing.get(key, [])
                if not isinstance(seq, list) or any(
                        not isinstance(p, list) or len(p) != 2 for p in seq):
                    errors.append(f"smoothing.{key}: must be a list of [factor, iters] pairs")

    init = raw.get("init", {"kind": "iid"})
    if not isinstance(init, dict) or init.get("kind", "iid") not in INITS:
        errors.append(f"init.kind: must be one of {INITS}")
        init = {"kind": "iid"}
    elif init.get("kind") == "labels" and not isinstance(init.get("path"), str):
        errors.append("init.path: labels initialization needs a PGM path")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        errors.append("seed: must be an integer")
        seed = 0
    max_iters = raw.get("max_iters", 2000)
    if not isinstance(max_iters, int) or max_iters < 0:
        errors.append("max_iters: must be a nonnegative integer")
        max_iters = 2000
    grad_tol = raw.get("grad_tol", 1e-6)
    if not isinstance(grad_tol, (int, float)) or grad_tol < 0:
        errors.append("grad_tol: must be nonnegative")
        grad_tol = 1e-6
    step0 = raw.get("step0", 1.0)
    if not isinstance(step0, (int, float)) or step0 <= 0:
        errors.append("step0: must be positive")
        step0 = 1.0
    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        errors.append("output_dir: must be a string")
        output_dir = "out"

    if errors:
        raise ConfigError(errors)
    init = {"kind": init.get("kind", "iid"), **{k: v for k, v in init.items() if k != "kind"}}
    return RunConfig(problem, phases, domain, boundary, pin_boundary, aniso, well,
                     mass, density, schedule, eps_band_override, smoothing, init,
                     seed, max_iters, grad_tol, step0, output_dir)


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def build_anisotropy(spec: dict) -> Anisotropy:
    params = {k: v for k, v in spec.items() if k != "kind"}
    return make_anisotropy(spec["kind"], **params)


def _density_fn(density: dict):
    if density["kind"] == "uniform":
        v = float(density["value"])
        return lambda x, y: np.full_like(np.asarray(x, dtype=float), v)
    cx, cy = density.get("center", [0.5, 0.5])
    r2 = float(density["radius"]) ** 2
    inside, outside = float(density["inside"]), float(density["outside"])
    def fn(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.where((x - cx) ** 2 + (y - cy) ** 2 < r2, inside, outside)
    return fn


def _grid_factory(cfg: RunConfig):
    domain = cfg.domain
    kind = domain.get("type", "square")
    base_mask = None
    if kind == "mask_file":
        labs = read_pgm_labels(domain["path"])
        base_mask = labs.values > 0

    def factory(n: int) -> Grid:
        grid = Grid.unit_square(n, cfg.boundary)
        if kind == "square":
            return grid
        if kind == "disk":
            mask = make_disk_mask(grid, tuple(domain.get("center", [0.5, 0.5])), domain["radius"])
        elif kind == "triangle":
            mask = make_triangle_mask(grid, [tuple(v) for v in domain["vertices"]])
        elif kind == "hexagon":
            mask = make_hexagon_mask(grid, tuple(domain.get("center", [0.5, 0.5])), domain["radius"])
        else:
            src = base_mask
            ix = np.clip(np.round(np.linspace(0, src.shape[0] - 1, n)).astype(int), 0, src.shape[0] - 1)
            iy = np.clip(np.round(np.linspace(0, src.shape[1] - 1, n)).astype(int), 0, src.shape[1] - 1)
            mask = src[np.ix_(ix, iy)]
        return grid.with_mask(mask)

    return factory


def build_problem(cfg: RunConfig) -> Problem:
    aniso = build_anisotropy(cfg.anisotropy)
    weight_fn = None
    if cfg.problem == "weighted_isoperimetric":
        weight_fn = _density_fn(cfg.density)
        lo = min(cfg.density.get("inside", cfg.density.get("value", 1.0)),
                 cfg.density.get("outside", cfg.density.get("value", 1.0)))
        hi = max(cfg.density.get("inside", cfg.density.get("value", 1.0)),
                 cfg.density.get("outside", cfg.density.get("value", 1.0)))
        aniso = DensityWeighted(aniso, weight_fn, nu_bounds=(float(lo), float(hi)))

    fractions = None
    abs_targets = None
    mass = cfg.mass
    if "fraction" in mass:
        fractions = np.array([mass["fraction"]])
    elif "fractions" in mass:
        fractions = np.asarray(mass["fractions"], dtype=float)
    elif "target" in mass:
        abs_targets = np.array([mass["target"]])
    else:
        abs_targets = np.asarray(mass["targets"], dtype=float)

    init_labels = None
    if cfg.init["kind"] == "labels":
        init_labels = read_pgm_labels(cfg.init["path"])

    return Problem(
        n_phases=cfg.phases, aniso=aniso, well=DoubleWell.default(),
        grid_factory=_grid_factory(cfg), fractions=fractions, abs_targets=abs_targets,
        weight_fn=weight_fn, pin_boundary=cfg.pin_boundary,
        init_kind=cfg.init["kind"], init_cells=int(cfg.init.get("cells", 8)),
        init_labels=init_labels, init_eta=float(cfg.init.get("eta", 1e-3)))


def build_schedule(cfg: RunConfig) -> ContinuationSchedule:
    smoothing = None
    if cfg.smoothing is not None:
        smoothing = SmoothingContinuation(
            first_stage=[(float(f), int(m)) for f, m in cfg.smoothing.get("first_stage", [])],
            later_stages=[(float(f), int(m)) for f, m in cfg.smoothing.get("later_stages", [])])
    common = dict(seed=cfg.seed, max_iters=cfg.max_iters, grad_tol=cfg.grad_tol,
                  step0=cfg.step0, enforce_eps_band=not cfg.eps_band_override,
                  smoothing=smoothing)
    if "stages" in cfg.schedule:
        stages = [Stage(st["n"], float(st["eps"])) for st in cfg.schedule["stages"]]
        return ContinuationSchedule(stages, **common)
    auto = cfg.schedule["auto"]
    return make_schedule(auto["n0"], auto["stages"], refine=float(auto.get("refine", 1.5)),
                         eps0=auto.get("eps0"), **common)


def _atomic_write(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pgm_bytes(labels: Labels) -> bytes:
    """Deterministic binary PGM: phase i maps to gray round(255 i / n),
    masked nodes to black.  Rows run top-down (row 0 is y = max)."""
    n = max(labels.n_phases, 1)
    lut = np.zeros(n + 1, dtype=np.uint8)
    for i in range(1, n + 1):
        lut[i] = int(round(255.0 * i / n))
    img = lut[labels.values]           # (nx, ny)
    raster = img.T[::-1, :]            # rows top-down, width nx
    header = f"P5\n{labels.grid.nx} {labels.grid.ny}\n255\n".encode("ascii")
    return header + raster.tobytes()


def render_labels(labels: Labels, path: str) -> None:
    """Write the label raster as a binary PGM (byte-exact for fixed input)."""
    try:
        _atomic_write(path, pgm_bytes(labels))
    except OSError as e:
        raise OSError(f"cannot write label raster {path}: {e}") from e


def read_pgm_labels(path: str) -> Labels:
    """Read a binary PGM back into labels: distinct nonzero gray levels in
    ascending order become phases 1..n, zero stays the masked marker."""
    with open(path, "rb") as f:
        data = f.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5)")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    pos += 1
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    img = raster.reshape(height, width)
    values = img[::-1, :].T            # back to (nx, ny) with y up
    levels = np.unique(values)
    levels = levels[levels > 0]
    lab = np.zeros(values.shape, dtype=np.int32)
    for i, lv in enumerate(sorted(levels), start=1):
        lab[values == lv] = i
    mask = None if (values > 0).all() else (values > 0)
    grid = Grid(values.shape[0], values.shape[1], 1.0 / (values.shape[0] - 1), mask=mask)
    return Labels(grid, lab)


def write_report(report: RunReport, out_dir: str) -> dict:
    """Emit report.json, iterations.csv, labels.pgm and the config echo;
    returns the paths written."""
    paths = {}
    summary = {
        "seed": report.seed,
        "warnings": report.warnings,
        "stages": [{
            "n": s.n, "eps": s.eps, "iterations": s.iterations,
            "energy_scaled": s.energy_scaled, "sum_residual": s.sum_residual,
            "mass_residual": s.mass_residual, "wall_time_s": s.wall_time_s,
        } for s in report.stages],
        "labels_file": "labels.pgm",
    }
    if report.config is not None:
        summary["config"] = report.config
    paths["report"] = os.path.join(out_dir, "report.json")
    _atomic_write(paths["report"], (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode())

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stage", "iter", "eps", "energy_scaled", "grad_norm",
                     "sum_residual", "mass_residual", "step"])
    for r in report.records:
        writer.writerow([r.stage, r.iter, repr(r.eps), repr(r.energy_scaled),
                         repr(r.grad_norm), repr(r.sum_residual),
                         repr(r.mass_residual), repr(r.step)])
    paths["iterations"] = os.path.join(out_dir, "iterations.csv")
    _atomic_write(paths["iterations"], buf.getvalue().encode())

    paths["labels"] = os.path.join(out_dir, "labels.pgm")
    render_labels(report.labels, paths["labels"])

    if report.config is not None:
        paths["config"] = os.path.join(out_dir, "config.json")
        _atomic_write(paths["config"], (json.dumps(report.config, indent=2, sort_keys=True) + "\n").encode())
    return paths


def _cmd_run(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as f:
            cfg = parse_config(f.read())
    except OSError as e:
        print(f"config error: {e}", file=_sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        for msg in e.errors:
            print(f"config error: {msg}", file=_sys.stderr)
        return EXIT_CONFIG
    out_dir = args.output_dir or os.environ.get(OUTDIR_ENV) or cfg.output_dir
    try:
        problem = build_problem(cfg)
        schedule = build_schedule(cfg)
        report = run_continuation(problem, schedule, config_echo=cfg.to_dict())
        paths = write_report(report, out_dir)
    except Exception as e:
        print(f"runtime failure: {e}", file=_sys.stderr)
        return EXIT_RUNTIME
    for s in report.stages:
        print(f"stage N={s.n} eps={s.eps:.6g}: scaled energy {s.energy_scaled:.6f} "
              f"({s.iterations} iterations, {s.wall_time_s:.1f}s)")
    for w in report.warnings:
        print(f"warning: {w}")
    print(f"artifacts in {out_dir}: " + ", ".join(sorted(os.path.basename(p) for p in paths.values())))
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as f:
            parse_config(f.read())
    except OSError as e:
        print(f"config error: {e}", file=_sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        for msg in e.errors:
            print(f"config error: {msg}", file=_sys.stderr)
        return EXIT_CONFIG
    print("config ok")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.what != "profile":
        print(f"unknown oracle {args.what!r}", file=_sys.stderr)
        return EXIT_CONFIG
    try:
        value = profile_energy_1d(Profile(args.z, args.eta))
    except ValueError as e:
        print(f"config error: {e}", file=_sys.stderr)
        return EXIT_CONFIG
    print(f"{value:.10f}")
    return EXIT_OK


def _cmd_sharp(args) -> int:
    try:
        spec = json.loads(args.aniso)
        aniso = build_anisotropy(spec)
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as e:
        print(f"config error: bad anisotropy spec: {e}", file=_sys.stderr)
        return EXIT_CONFIG
    try:
        labels = read_pgm_labels(args.labels)
        if args.spacing is not None:
            labels = Labels(
                Grid(labels.grid.nx, labels.grid.ny, args.spacing, mask=labels.grid.mask),
                labels.values)
        value = sharp_energy(labels, aniso, scale_by_inv_c=not args.raw)
    except OSError as e:
        print(f"config error: {e}", file=_sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"runtime failure: {e}", file=_sys.stderr)
        return EXIT_RUNTIME
    print(f"{value:.10f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phasepart",
        description="Phase-field minimal partitions and isoperimetric shapes")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config and write artifacts")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output-dir", default=None,
                       help=f"override the config's output dir (or set ${OUTDIR_ENV})")
    p_run.set_defaults(fn=_cmd_run)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(fn=_cmd_validate)

    p_or = sub.add_parser("oracle", help="print reference values")
    p_or.add_argument("what", choices=["profile"])
    p_or.add_argument("--z", type=float, default=1.0)
    p_or.add_argument("--eta", type=float, default=0.0)
    p_or.set_defaults(fn=_cmd_oracle)

    p_sh = sub.add_parser("sharp", help="sharp-interface energy of a label raster")
    p_sh.add_argument("--labels", required=True)
    p_sh.add_argument("--aniso", required=True, help='JSON, e.g. \'{"kind": "euclidean"}\'')
    p_sh.add_argument("--raw", action="store_true", help="report c_W times the perimeter scale")
    p_sh.add_argument("--spacing", type=float, default=None)
    p_sh.set_defaults(fn=_cmd_sharp)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())

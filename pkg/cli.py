#!/usr/bin/env python3
"""
Hyperbolic Polygon and Tiling Toolkit
-------------------------------------
Evaluates the regular-polygon formulas, runs the verification suite, minimizes
polygon perimeter at fixed area, and builds, audits and renders tilings.

Usage:
    python cli.py eval --Ak 7
    python cli.py verify --all [--table-dir tables] [--out report.json]
    python cli.py optimize --n 7 --area 1.0471975511965976 --seed 1
    python cli.py tile --fixture klein-quartic --audit all

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from hypertile_utils import (
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    N_JOBS,
    TOL_AREA,
    TOL_OPT,
    AuditReport,
    DomainError,
    HypertileError,
    TilingStructureError,
    defaults_header,
    dumps_json,
    log_run_record,
    setup_logging,
    write_tables,
)
from isoperimetry import CHECKS, min_perimeter_polygon, run_suite
from polygons import (
    RegularSpec,
    a_k,
    angle_from_perimeter,
    area_fixed_perimeter,
    heron_area,
    p_k,
    regular_area,
    regular_perimeter,
    side_opposite,
)
from render_svg import write_svg
from tiling_fixtures import generate_patch, load_fixture
from tilings import AUDITS, TilingGraph, dump_tiling, load_tiling, run_audits, validate_audit

logger = logging.getLogger("hypertile")

###############################################################################
# Run configuration
###############################################################################


class GridSpec(BaseModel):
    lo: float
    hi: float
    step: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "GridSpec":
        if not self.lo < self.hi:
            raise ValueError(f"grid needs lo < hi, got {self.lo}:{self.hi}")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like lo:hi:step, got {text!r}")
        lo, hi, step = (float(p) for p in parts)
        return cls(lo=lo, hi=hi, step=step)


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation."""

    model_config = ConfigDict(extra="forbid")

    command: Literal["eval", "verify", "optimize", "tile"]
    quantity: Optional[str] = None
    values: List[float] = Field(default_factory=list)
    k: Optional[float] = None
    n: Optional[float] = None
    area: Optional[float] = None
    perimeter: Optional[float] = None
    n_max: Optional[int] = Field(default=None, ge=3)
    depth: Optional[int] = Field(default=None, ge=0)
    grid: Optional[GridSpec] = None
    seed: Optional[int] = None
    restarts: int = Field(default=DEFAULT_RESTARTS, ge=1)
    tol_opt: float = Field(default=TOL_OPT, gt=0.0)
    tol_area: float = Field(default=TOL_AREA, gt=0.0)
    n_jobs: int = N_JOBS
    checks: List[str] = Field(default_factory=list)
    run_all: bool = False
    fixture: Optional[str] = None
    input: Optional[Path] = None
    output: Optional[Path] = None
    svg: Optional[Path] = None
    table_dir: Optional[Path] = None
    audits: List[str] = Field(default_factory=list)
    format: Literal["json", "text"] = "text"

    @field_validator("grid", mode="before")
    @classmethod
    def _parse_grid(cls, value):
        if isinstance(value, str):
            return GridSpec.parse(value)
        return value

    @field_validator("audits", mode="before")
    @classmethod
    def _split_audits(cls, value):
        if isinstance(value, str):
            return [name.strip() for name in value.split(",") if name.strip()]
        return value

    @property
    def effective_seed(self) -> int:
        return DEFAULT_SEED if self.seed is None else self.seed


###############################################################################
# eval
###############################################################################

# quantity -> (argument names, evaluator)
QUANTITIES: Dict[str, Tuple[Tuple[str, ...], Callable[..., float]]] = {
    "Ak": (("k",), a_k),
    "Pk": (("k",), p_k),
    "heron": (("x", "y", "z"), heron_area),
    "side": (("t1", "t2", "t3"), side_opposite),
    "angle_from_perimeter": (("n", "P"), angle_from_perimeter),
    "area_fixed_perimeter": (("n", "P"), area_fixed_perimeter),
    "regular_area": (("n", "theta"), lambda n, theta: regular_area(RegularSpec(n, theta))),
    "regular_perimeter": (("n", "theta"), lambda n, theta: regular_perimeter(RegularSpec(n, theta))),
}


def cmd_eval(config: RunConfig) -> int:
    names, fn = QUANTITIES[config.quantity]
    inputs = dict(zip(names, config.values))
    value = float(fn(*config.values))
    logger.info("eval %s%s = %r", config.quantity, tuple(config.values), value)
    if config.format == "json":
        print(dumps_json({"quantity": config.quantity, "inputs": inputs, "value": value, "defaults": defaults_header()}))
    else:
        print(f"{value:.16g}")
    return 0


###############################################################################
# verify
###############################################################################


def suite_params(config: RunConfig) -> Dict[str, dict]:
    """Map command-line overrides onto the keyword arguments of each check."""
    params: Dict[str, dict] = {name: {} for name in CHECKS}
    if config.perimeter is not None:
        params["concavity"]["P"] = config.perimeter
    if config.k is not None:
        params["fewer_sides"]["k"] = config.k
        params["doubling"]["k"] = config.k
    if config.area is not None:
        params["regular_monotone"]["area"] = config.area
    if config.n_max is not None:
        params["regular_monotone"]["n_max"] = config.n_max
    if config.n is not None:
        params["perimeter_in_area"]["n"] = int(config.n)
    if config.grid is not None:
        params["concavity"].update(n_lo=config.grid.lo, n_hi=config.grid.hi, step=config.grid.step)
        params["doubling"].update(n_hi=config.grid.hi, step=config.grid.step)
    if config.seed is not None:
        params["isosceles"]["seed"] = config.seed
        params["optimizer"]["seed"] = config.seed
    return params


def emit(payload: dict, out: Optional[Path]) -> None:
    text = dumps_json(payload)
    if out is None:
        print(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text + "\n", encoding="utf-8")
    logger.info("report written to %s", out)


def report_payload(reports: Sequence[AuditReport], **extra) -> dict:
    return {
        "defaults": defaults_header(),
        **extra,
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }


def cmd_verify(config: RunConfig) -> int:
    names = sorted(CHECKS) if config.run_all else config.checks
    if not names:
        raise DomainError("verify needs --all or at least one --check")
    reports = run_suite(names, suite_params(config), n_jobs=config.n_jobs)
    if config.table_dir is not None:
        for path in write_tables(reports, config.table_dir):
            logger.info("table written to %s", path)
    emit(report_payload(reports), config.output)
    failed = [r.check for r in reports if not r.passed]
    if failed:
        logger.warning("failed checks: %s", ", ".join(failed))
        return 1
    return 0


###############################################################################
# optimize
###############################################################################


def cmd_optimize(config: RunConfig) -> int:
    if config.n is None or config.area is None:
        raise DomainError("optimize needs --n and --area")
    result = min_perimeter_polygon(
        int(config.n),
        config.area,
        seed=config.effective_seed,
        restarts=config.restarts,
        tol_opt=config.tol_opt,
        tol_area=config.tol_area,
        n_jobs=config.n_jobs,
    )
    logger.info("perimeter gap to regular benchmark: %.3e", result.gap)
    emit({"defaults": {**defaults_header(), "seed": config.effective_seed}, "result": result.to_dict()}, config.output)
    return 0 if result.converged else 1


###############################################################################
# tile
###############################################################################


def build_tiling(config: RunConfig) -> TilingGraph:
    if config.fixture is not None:
        return load_fixture(config.fixture)
    if config.input is not None:
        return load_tiling(config.input)
    if config.k is None or config.depth is None:
        raise DomainError("tile needs --fixture, --in, or both --k and --depth")
    return generate_patch(int(config.k), config.depth)


def cmd_tile(config: RunConfig) -> int:
    t = build_tiling(config)
    name = t.meta.get("name", config.fixture or str(config.input))
    reports: List[AuditReport] = []
    if t.invariant_violations():
        if "validate" not in config.audits and "all" not in config.audits:
            t.validate()
        # the remaining audits assume a well-formed tiling
        reports = [validate_audit(t)]
    elif config.audits:
        k = config.k if config.k is not None else t.meta.get("k")
        reports = run_audits(t, config.audits, k=k)

    if config.output is not None:
        dump_tiling(t, config.output)
        logger.info("tiling written to %s", config.output)
    if config.svg is not None:
        write_svg(t, config.svg)
        logger.info("svg written to %s", config.svg)
    if not config.audits:
        if config.output is None and config.svg is None:
            print(dumps_json(t.to_dict()))
        return 0

    emit(report_payload(reports, tiling=name), None)
    failed = [r.check for r in reports if not r.passed]
    if failed:
        logger.warning("tiling %s failed audits: %s", name, ", ".join(failed))
        return 1
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "eval": cmd_eval,
    "verify": cmd_verify,
    "optimize": cmd_optimize,
    "tile": cmd_tile,
}


###############################################################################
# Argument parsing
###############################################################################


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Hyperbolic polygon isoperimetry and tiling toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="Evaluate one closed-form quantity.")
    quantity = ev.add_mutually_exclusive_group(required=True)
    quantity.add_argument("--Ak", nargs=1, type=float, metavar="K", help="Area (k-6)pi/3 of the regular k-gon with 2pi/3 angles.")
    quantity.add_argument("--Pk", nargs=1, type=float, metavar="K", help="Perimeter of the regular k-gon with 2pi/3 angles.")
    quantity.add_argument("--heron", nargs=3, type=float, metavar=("X", "Y", "Z"), help="Triangle area from its side lengths.")
    quantity.add_argument("--side", nargs=3, type=float, metavar=("T1", "T2", "T3"), help="Side opposite T3 from three angles.")
    quantity.add_argument("--angle-from-perimeter", nargs=2, type=float, metavar=("N", "P"), help="Angle of the regular n-gon of perimeter P.")
    quantity.add_argument("--area-fixed-perimeter", nargs=2, type=float, metavar=("N", "P"), help="Area of the regular n-gon of perimeter P.")
    quantity.add_argument("--regular-area", nargs=2, type=float, metavar=("N", "THETA"), help="Area of the regular n-gon with angle THETA.")
    quantity.add_argument("--regular-perimeter", nargs=2, type=float, metavar=("N", "THETA"), help="Perimeter of the regular n-gon with angle THETA.")
    ev.add_argument("--format", choices=("text", "json"), default="text", help="Output format.")

    ve = sub.add_parser("verify", help="Run numerical and exact verification checks.")
    ve.add_argument("--all", dest="run_all", action="store_true", help="Run every check.")
    ve.add_argument("--check", dest="checks", action="append", default=[], choices=sorted(CHECKS), help="Check to run (repeatable).")
    ve.add_argument("--P", dest="perimeter", type=float, help="Perimeter for the concavity scan.")
    ve.add_argument("--k", type=float, help="k for the fewer-sides and doubling checks.")
    ve.add_argument("--area", type=float, help="Area for the regular monotonicity check.")
    ve.add_argument("--n-max", type=int, help="Largest n in the regular monotonicity check.")
    ve.add_argument("--n", type=float, help="Side count for the perimeter-in-area check.")
    ve.add_argument("--grid", type=str, help="Side-count grid lo:hi:step for the concavity and doubling scans.")
    ve.add_argument("--table-dir", type=Path, help="Write scan tables as CSV into this directory.")
    ve.add_argument("--out", dest="output", type=Path, help="Write the JSON report here instead of stdout.")
    ve.add_argument("--n-jobs", type=int, default=N_JOBS, help="Parallel workers for independent checks.")
    ve.add_argument("--seed", type=int, help="Seed for randomized checks (default HYPERTILE_SEED).")

    op = sub.add_parser("optimize", help="Least-perimeter n-gon of a given area.")
    op.add_argument("--n", type=int, required=True, help="Number of sides.")
    op.add_argument("--area", type=float, required=True, help="Target area.")
    op.add_argument("--seed", type=int, help="Random seed (default HYPERTILE_SEED).")
    op.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS, help="Number of random restarts.")
    op.add_argument("--tol-opt", type=float, default=TOL_OPT, help="Optimizer convergence tolerance.")
    op.add_argument("--tol-area", type=float, default=TOL_AREA, help="Allowed area error of the result.")
    op.add_argument("--n-jobs", type=int, default=N_JOBS, help="Parallel workers for restarts.")
    op.add_argument("--out", dest="output", type=Path, help="Write the JSON result here instead of stdout.")

    ti = sub.add_parser("tile", help="Build, audit, and render tilings.")
    source = ti.add_mutually_exclusive_group()
    source.add_argument("--fixture", type=str, help="Shipped fixture name.")
    source.add_argument("--in", dest="input", type=Path, help="Tiling JSON file.")
    ti.add_argument("--k", type=float, help="Sides per tile for a generated patch, or k for the audits.")
    ti.add_argument("--depth", type=int, help="Reflection depth of a generated {k,3} patch.")
    ti.add_argument("--out", dest="output", type=Path, help="Write the tiling JSON here.")
    ti.add_argument("--svg", type=Path, help="Render the lifted faces as SVG here.")
    ti.add_argument(
        "--audit",
        dest="audits",
        type=str,
        default="",
        help=f"Comma list of audits: {', '.join(AUDITS)}, all.",
    )
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(args).items() if v is not None}
    if args.command == "eval":
        for name in QUANTITIES:
            if fields.get(name) is not None:
                fields["quantity"] = name
                fields["values"] = fields.pop(name)
        fields = {k: v for k, v in fields.items() if k not in QUANTITIES}
    return RunConfig(**fields)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("hypertile")
    try:
        config = config_from_args(args)
        status = COMMANDS[config.command](config)
    except ValidationError as exc:
        logger.error("invalid %s arguments: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        log_run_record(args.command, "usage-error", {"error": str(exc)})
        return 2
    except TilingStructureError as exc:
        logger.error("tiling violates invariant %s: %s", exc.invariant, exc)
        print(f"error: invariant {exc.invariant} violated: {exc}", file=sys.stderr)
        log_run_record(args.command, "domain-error", {"invariant": exc.invariant, "error": str(exc)})
        return 2
    except (HypertileError, OSError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        log_run_record(args.command, "domain-error", {"error": str(exc)})
        return 2
    log_run_record(args.command, "pass" if status == 0 else "fail", {"argv": list(argv or sys.argv[1:])})
    return status


if __name__ == "__main__":
    raise SystemExit(main())

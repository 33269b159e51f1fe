"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 a study ran but a rate fit missed its tolerance.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import os
import re
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .harness import (
    ContractViolation,
    DomainGuardError,
    decay_study,
    default_window,
    epsilon_study,
)
from .model import (
    Grid,
    ModelParams,
    ParameterDomainError,
    StateBGK,
    StateCD,
    bgk_to_uv,
    cd_to_uv,
    gaussian,
    uv_to_bgk,
    uv_to_cd,
    well_prepared_data,
)
from .solvers import (
    SolverConfig,
    SolverError,
    bgk_solve,
    default_dt,
    linear_propagate,
    nonlinear_jinxin_solve,
    parabolic_solve,
)

log = logging.getLogger("jinxin")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_TOLERANCE = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


def defaults_text() -> str:
    return resources.files("jinxin").joinpath("defaults.ini").read_text()


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return i
        elif current == section and key is not None and re.match(
            rf"\s*{re.escape(key)}\s*[=:]", line, re.IGNORECASE
        ):
            return i
    return None


@dataclass
class RunConfig:
    """Parsed configuration: every value of ``defaults.ini`` overlaid with the user file."""

    parser: configparser.ConfigParser
    source: str = "<defaults>"

    @classmethod
    def load(cls, path=None) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.read_string(defaults_text(), source="defaults.ini")
        if path is None:
            return cls(cp)
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
        user = configparser.ConfigParser(interpolation=None)
        try:
            user.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for section in user.sections():
            if not cp.has_section(section):
                raise ConfigError(f"{path}:{_line_of(text, section, None)}: unknown section [{section}]")
            for key, value in user.items(section):
                if not cp.has_option(section, key):
                    raise ConfigError(
                        f"{path}:{_line_of(text, section, key)}: unknown key '{key}' in [{section}]"
                    )
                cp.set(section, key, value)
        return cls(cp, str(path))

    def _get(self, section, key, conv, allow_empty=False):
        raw = self.parser.get(section, key).strip()
        if raw == "" and allow_empty:
            return None
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"{self.source}: [{section}] {key} = {raw!r}: {exc}") from exc

    def real(self, section, key, allow_empty=False):
        return self._get(section, key, float, allow_empty)

    def integer(self, section, key):
        return self._get(section, key, int)

    def flag(self, section, key):
        try:
            return self.parser.getboolean(section, key)
        except ValueError as exc:
            raise ConfigError(f"{self.source}: [{section}] {key}: {exc}") from exc

    def reals(self, section, key):
        raw = self.parser.get(section, key).strip()
        if not raw:
            return ()
        try:
            return tuple(float(v) for v in raw.split(","))
        except ValueError as exc:
            raise ConfigError(f"{self.source}: [{section}] {key} = {raw!r}: {exc}") from exc

    def choice(self, section, key, options):
        v = self.parser.get(section, key).strip().lower()
        if v not in options:
            raise ConfigError(f"{self.source}: [{section}] {key} must be one of {options}, got {v!r}")
        return v

    def model(self) -> ModelParams:
        return ModelParams(
            self.real("model", "epsilon"),
            self.real("model", "lam"),
            self.real("model", "a"),
            self.reals("model", "h"),
        )

    def grid(self, section="grid") -> Grid:
        return Grid(self.integer(section, "n"), self.real(section, "length"))

    def initial(self, g: Grid):
        return gaussian(
            g,
            self.real("initial", "amplitude"),
            self.real("initial", "sigma"),
            self.real("initial", "center"),
        )

    def initial_cd(self, g: Grid, p: ModelParams) -> StateCD:
        u0 = self.initial(g)
        if self.choice("initial", "kind", ("well-prepared", "conservative")) == "conservative":
            return StateCD(u0, np.zeros(g.n))
        return uv_to_cd(well_prepared_data(u0, p, g), p)

    def dt(self, p, g):
        dt = self.real("solver", "dt", allow_empty=True)
        return default_dt(p, g) if dt is None else dt


def _mass_drift(traj) -> float:
    m = traj.mass()
    return float(np.max(np.abs(m - m[0])) / max(abs(m[0]), 1e-300))


def cmd_green_table(cfg: RunConfig, out: Path, jobs: int) -> int:
    p = cfg.model()
    xis, ts = cfg.reals("green", "xi"), cfg.reals("green", "t")
    if not xis or not ts:
        raise ConfigError("[green] xi and t must not be empty")
    if min(ts) < 0:
        raise ConfigError("[green] t values must be non-negative")
    path = io.write_green_table(out / "green_table.csv", xis, ts, p)
    log.info("wrote %s (%d rows)", path, len(xis) * len(ts))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path, jobs: int) -> int:
    p, g = cfg.model(), cfg.grid()
    t_final = cfg.real("simulate", "t_final")
    frames = cfg.integer("simulate", "frames")
    if frames < 2:
        raise ConfigError("[simulate] frames must be at least 2")
    record = tuple(np.linspace(0.0, t_final, frames))
    sc = SolverConfig(cfg.dt(p, g), t_final, cfg.flag("solver", "dealias"), record)
    kind = cfg.choice("simulate", "solver", ("cd", "bgk", "parabolic"))
    fmt = cfg.choice("simulate", "format", ("binary", "csv"))
    w0 = cfg.initial_cd(g, p)
    summary = {"solver": kind, "epsilon": repr(p.epsilon), "a": repr(p.a), "h": p.h_name,
               "n": str(g.n), "length": repr(g.length), "dt": repr(sc.dt), "t_final": repr(t_final)}
    if kind == "cd":
        traj = nonlinear_jinxin_solve(w0, sc, p, g)
        if not any(p.h):
            ref = np.array([linear_propagate(w0, t, p, g).stack() for t in traj.times])
            scale = max(np.max(np.abs(ref)), 1e-300)
            summary["linear_discrepancy"] = repr(float(np.max(np.abs(traj.states - ref)) / scale))
    elif kind == "bgk":
        traj = bgk_solve(uv_to_bgk(cd_to_uv(w0, p), p), sc, p, g)
    else:
        traj = parabolic_solve(w0.w1, sc, p, g)
    summary["mass_drift"] = repr(_mass_drift(traj))
    summary["steps"] = str(traj.info.get("steps", 0))
    if fmt == "binary":
        io.write_trajectory_binary(out / "trajectory.jxt", traj)
    else:
        io.write_trajectory_csv(out / "trajectory.csv", traj)
    io.write_summary(out / "simulate_summary.txt", summary)
    return EXIT_OK


def _decay(cfg: RunConfig, out: Path, jobs: int) -> int:
    p, g = cfg.model(), cfg.grid()
    t_lo = cfg.real("decay", "t_lo")
    t_hi = cfg.real("decay", "t_hi", allow_empty=True)
    if t_hi is None:
        t_hi = default_window(p, g)[1]
    sc = SolverConfig(cfg.dt(p, g), t_hi, cfg.flag("solver", "dealias"))
    res = decay_study(
        p, g, sc,
        u0=cfg.initial(g),
        window=(t_lo, t_hi),
        n_samples=cfg.integer("decay", "samples"),
        initial=cfg.choice("initial", "kind", ("well-prepared", "conservative")),
    )
    return _finish(res, out, "decay")


def _epsilon(cfg: RunConfig, out: Path, jobs: int) -> int:
    p = cfg.model()
    g = cfg.grid("epsilon")
    dt = cfg.real("solver", "dt", allow_empty=True)
    T = cfg.real("epsilon", "t_final")
    sc = None if dt is None else SolverConfig(dt, T, cfg.flag("solver", "dealias"))
    res = epsilon_study(
        p, cfg.reals("epsilon", "eps"), g, sc,
        T=T,
        u0=cfg.initial(g),
        profile_eps=cfg.real("epsilon", "profile_eps"),
        n_samples=cfg.integer("epsilon", "samples"),
        mu=cfg.real("epsilon", "mu"),
        corrected=cfg.flag("epsilon", "corrected"),
        jobs=jobs,
    )
    return _finish(res, out, "epsilon")


def _finish(res, out: Path, stem: str) -> int:
    io.write_study_csv(out / f"{stem}_study.csv", res)
    io.write_summary(out / f"{stem}_summary.txt", res.summary())
    for c in res.checks:
        log.info(c.describe())
    return EXIT_OK if res.passed else EXIT_TOLERANCE


def cmd_bgk_check(cfg: RunConfig, out: Path, jobs: int) -> int:
    """Kinetic and C-D solvers from the same data; L2 gap in ``u`` at ``t_final``."""
    p, g = cfg.model(), cfg.grid()
    T, dt = cfg.real("bgk", "t_final"), cfg.real("bgk", "dt")
    tol = cfg.real("bgk", "tolerance")
    sc = SolverConfig(dt, T, cfg.flag("solver", "dealias"))
    w0 = cfg.initial_cd(g, p)
    cd = nonlinear_jinxin_solve(w0, sc, p, g)
    bgk = bgk_solve(uv_to_bgk(cd_to_uv(w0, p), p), sc, p, g)
    u_bgk = bgk_to_uv(StateBGK(bgk.states[-1, 0], bgk.states[-1, 1]), p).u
    gap = float(np.sqrt(np.sum((cd.states[-1, 0] - u_bgk) ** 2) * g.dx))
    summary = {
        "study": "bgk-check",
        "l2_gap": repr(gap),
        "tolerance": repr(tol),
        "mass_drift_cd": repr(_mass_drift(cd)),
        "mass_drift_bgk": repr(_mass_drift(bgk)),
        "pass": "true" if gap <= tol else "false",
    }
    io.write_summary(out / "bgk_check_summary.txt", summary)
    log.info("bgk-check gap %.3e (tolerance %.1e)", gap, tol)
    return EXIT_OK if gap <= tol else EXIT_TOLERANCE


COMMANDS = {
    "green-table": cmd_green_table,
    "simulate": cmd_simulate,
    "decay-study": _decay,
    "epsilon-study": _epsilon,
    "bgk-check": cmd_bgk_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="jinxin",
        description="Green kernels, simulations and decay / small-eps studies "
        "for the diffusively scaled Jin-Xin relaxation system.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="exit codes: 0 ok, 2 config error, 3 numerical failure, 4 tolerance miss\n\n"
        "defaults (override any subset with --config):\n\n" + defaults_text(),
    )
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", metavar="PATH", help="INI file overriding defaults.ini")
    ap.add_argument("--out", metavar="DIR", help="output directory (fallback: $JINXIN_OUT, then ./out)")
    ap.add_argument("--jobs", type=int, default=1, metavar="N", help="concurrent solver runs (default 1)")
    ap.add_argument("--seedless", action="store_true",
                    help="reserved; nothing here is random, the flag takes no value")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    out = Path(args.out or os.environ.get("JINXIN_OUT") or "out")
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        cfg = RunConfig.load(args.config)
        return COMMANDS[args.command](cfg, out, args.jobs)
    except (ConfigError, ParameterDomainError, DomainGuardError, ContractViolation) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # remaining invariant checks on parsed values (step sizes, record times)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``fracnehari {solve,audit,moser,verify,oracle}``.

Exit codes: 0 ok, 1 configuration error, 2 non-convergence, 3 numeric
failure (overflow, projection failure, failed oracle or verification
check), 4 hypothesis-audit failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import platform
import sys
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from .config import SCHEMA, ConfigError, RunConfig, load_config
from .errors import NumericalOverflow, ProjectionFailure
from .functional import (
    energy,
    ground_energy_upper_bound,
    norm_sq_upper_bound,
    project,
    sq_estimate,
)
from .grid import GridSpec, write_field_csv
from .moser import concentration_scan, probe_H, write_probes_csv
from .nonlinearity import audit, classify_growth, log_sample, min_Cq
from .oracle import oracle_rows
from .solver import SolveConfig, solve, vanishing_monitor
from .verify import (
    SplitExperiment,
    default_bump_pair,
    growth_envelope_check,
    norm_additivity_defect,
    splitting_identity_check,
    wave_packet,
)

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_NUMERIC, EXIT_AUDIT = 0, 1, 2, 3, 4


class Report:
    """Collects results and checks; always written, even on failure."""

    def __init__(self, command: str, cfg: RunConfig | None):
        self.command = command
        self.cfg = cfg
        self.started = _dt.datetime.now(_dt.timezone.utc)
        self.results: list[tuple[str, object]] = []
        self.checks: list[tuple[str, bool]] = []
        self.notes: list[str] = []
        self.termination = "incomplete"

    def result(self, key, value):
        self.results.append((key, value))

    def check(self, name, ok) -> bool:
        self.checks.append((name, bool(ok)))
        return bool(ok)

    @property
    def all_passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def table(self) -> str:
        width = max((len(n) for n, _ in self.checks), default=0)
        return "\n".join(f"{n:<{width}s}  {'pass' if ok else 'FAIL'}" for n, ok in self.checks)

    def text(self) -> str:
        try:
            version = metadata.version("artifact")
        except metadata.PackageNotFoundError:
            version = "unknown"
        lines = [
            f"command={self.command}",
            f"termination={self.termination}",
            f"started={self.started.isoformat()}",
            f"finished={_dt.datetime.now(_dt.timezone.utc).isoformat()}",
            f"package_version={version}",
            f"python={platform.python_version()}",
            f"numpy={np.__version__}",
            f"scipy={scipy.__version__}",
            "",
            "[results]",
        ]
        lines += [f"{k}={_fmt(v)}" for k, v in self.results]
        lines += ["", "[checks]", self.table(), ""]
        if self.notes:
            lines += ["[notes]"] + self.notes + [""]
        lines += ["[config]", self.cfg.echo() if self.cfg else "(not parsed)"]
        return "\n".join(lines) + "\n"

    def write(self, out: Path | None):
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            (out / "summary.txt").write_text(self.text())


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


# ---------------------------------------------------------------------------
# commands


def _bound_q(cfg: RunConfig) -> float:
    n = cfg["nonlinearity"]
    return {"pure_power": n["p"] + 1.0, "paper_critical": n["q"]}.get(n["family"], 4.0)


def _sample(cfg: RunConfig):
    a = cfg["audit"]
    return log_sample(a["s_min"], a["s_max"], a["n_samples"])


def cmd_solve(cfg: RunConfig, out: Path, rep: Report) -> int:
    s = cfg["solver"]
    grid, nl = cfg.grid(), cfg.nonlinearity()
    sc = SolveConfig(
        grid=grid, nl=nl, init=s["init"], width=s["width"], amplitude=s["amplitude"],
        init_file=s["init_file"] or None, init_noise=s["init_noise"], step0=s["step0"],
        shrink=s["shrink"], armijo=s["armijo"], tol_residual=s["tol_residual"],
        max_iters=s["max_iters"], recenter_every=s["recenter_every"],
        recenter_radius=s["recenter_radius"], rho0=s["rho0"], seed=cfg["run"]["seed"],
    )
    u, er, trace = solve(sc)
    rep.termination = trace.termination
    out.mkdir(parents=True, exist_ok=True)
    trace.write_csv(out / "trace.csv")
    write_field_csv(out / "field.csv", u)
    rep.result("nonlinearity", nl.describe())
    rep.result("iterations", trace.iterations)
    if trace.message:
        rep.notes.append(trace.message)
    if er is not None:
        for k in er.FIELDS:
            rep.result(k, getattr(er, k))
        rep.check("energy_monotone", trace.energy_monotone())
        rep.check("nehari_constraint", trace.constraint_defect() <= 1e-10)
        rep.result("min_norm", trace.min_norm)
        rep.result("max_norm", trace.max_norm)
        rep.check("norm_bounded_below", trace.min_norm > s["rho"])
        van = vanishing_monitor(trace, u, s["recenter_radius"], s["gamma"])
        rep.result("window_mass_min", van.min_mass)
        rep.check("non_vanishing", van.non_vanishing)
        rep.notes.append(van.message)
        for k, v in trace.dichotomy.items():
            rep.result(f"dichotomy_{k}", v)
        q = _bound_q(cfg)
        C_q = min_Cq(nl, q, _sample(cfg))
        S = sq_estimate(grid, q)
        theta = cfg["audit"]["theta"]
        m_up = ground_energy_upper_bound(q, C_q, S.value)
        n_up = norm_sq_upper_bound(q, C_q, theta, S.value)
        rep.result("bound_q", q)
        rep.result("bound_C_q", C_q)
        rep.result("bound_S_q", S.value)
        rep.result("bound_S_q_argmin", S.argmin)
        rep.result("ground_energy_upper_bound", m_up)
        rep.result("norm_sq_upper_bound", n_up)
        rep.result("smallness_regime_active", n_up < s["rho0"] ** 2)
        if trace.termination == "converged":
            rep.check("J_below_energy_bound", er.J <= m_up)
            rep.check("norm_sq_below_cap", er.norm_sq <= n_up)
            rep.check("H_identity", abs(er.H_integral - 2 * er.J) <= 1e-8 * abs(er.J))
    return {
        "converged": EXIT_OK,
        "max_iters": EXIT_NONCONVERGED,
        "line_search_stalled": EXIT_NONCONVERGED,
    }.get(trace.termination, EXIT_NUMERIC)


def cmd_audit(cfg: RunConfig, out: Path, rep: Report) -> int:
    a = cfg["audit"]
    nl = cfg.nonlinearity()
    report = audit(nl, _sample(cfg), theta=a["theta"], C_q=a["C_q"], q=a["q"])
    rep.result("nonlinearity", nl.describe())
    rep.result("min_C_q_on_sample", min_Cq(nl, a["q"], _sample(cfg)))
    for name, ok in report.checks.items():
        rep.check(name, ok)
    rep.notes.extend(report.lines())
    for quantity in ("f", "dfs"):
        g = classify_growth(nl, quantity=quantity)
        rep.result(f"growth_{quantity}", g.growth_class)
        rep.notes.extend(g.lines())
    rep.termination = "passed" if report.passed else "hypothesis_failure"
    return EXIT_OK if report.passed else EXIT_AUDIT


def cmd_moser(cfg: RunConfig, out: Path, rep: Report) -> int:
    m = cfg["moser"]
    grid = cfg.grid()
    probes = [probe_H(a, m["family"], m["budget"], grid, m["small_amplitude"]) for a in m["alpha"]]
    out.mkdir(parents=True, exist_ok=True)
    write_probes_csv(out / "moser_probe.csv", probes)
    for p in probes:
        tag = f"alpha={p.alpha:g}"
        rep.result(f"H_hat[{tag}]", p.H_hat)
        rep.result(f"skipped[{tag}]", len(p.skipped))
        rep.result(f"trend[{tag}]", p.concentration_trend())
        rep.check(f"small_amplitude_ratio[{tag}]", abs(p.small_amplitude_ratio / p.alpha - 1) <= 0.01)
    H = [p.H_hat for p in sorted(probes, key=lambda p: p.alpha)]
    rep.check("H_hat_nondecreasing_in_alpha", all(b >= a for a, b in zip(H, H[1:])))
    if m["scan"]:
        sgrid = GridSpec(m["scan_L"], m["scan_N"])
        eps = np.geomspace(m["scan_eps_max"], m["scan_eps_min"], m["scan_points"])
        scan = concentration_scan(sgrid, m["alpha"], eps)
        with open(out / "concentration_scan.csv", "w") as fh:
            fh.write("alpha,eps,ratio\n")
            for a, row in zip(scan.alphas, scan.ratios):
                for e, r in zip(scan.eps, row):
                    fh.write(f"{a:.17g},{e:.17g},{r:.17g}\n")
        for a, rate in zip(scan.alphas, scan.growth_rates):
            rep.result(f"scan_growth_rate[alpha={a:g}]", float(rate))
    rep.termination = "completed"
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path, rep: Report) -> int:
    v = cfg["verify"]
    grid, nl = cfg.grid(), cfg.nonlinearity()
    u, w = default_bump_pair(grid) if v["bump"] == "gaussian" else (wave_packet(grid),) * 2
    seps = v["separations"]
    ex = SplitExperiment(u, w, seps, nl).run()
    out.mkdir(parents=True, exist_ok=True)
    ex.write_csv(out / "split.csv")
    with open(out / "norm_additivity.csv", "w") as fh:
        fh.write("d,norm_additivity_defect\n")
        for d in ex.separations:
            fh.write(f"{d:.17g},{norm_additivity_defect(u, w, d):.17g}\n")

    for fn, ok in ex.monotone().items():
        rep.check(f"brezis_lieb_monotone[{fn}]", ok)
    for fn in ex.normalized:
        rep.check(f"brezis_lieb_small_at_largest_d[{fn}]", ex.normalized[fn][-1] <= v["split_tol"])
    rep.check("H_defect_triangle_bound", ex.triangle_bound_holds())
    rep.check("disjoint_at_largest_d", ex.disjoint_at_largest())

    wp = wave_packet(grid)
    d = ex.separations[-1]
    un = wp + wp.roll(grid.steps(d))
    split = splitting_identity_check(wp, wp, d, nl) / energy(un, nl, with_gradient=False).norm_sq
    rep.result("splitting_identity_wave_packet_relative", split)
    rep.check("splitting_identity_wave_packet", split <= v["split_tol"])

    uproj, _ = project(u + w.roll(grid.steps(d)), nl)
    e = energy(uproj, nl, with_gradient=False)
    rep.check("J_equals_half_H_on_nehari", abs(e.J - 0.5 * e.H_integral) <= 1e-10 * abs(e.J))

    if nl.alpha0 is not None and not v["envelope_alpha"] > nl.alpha0:
        raise ConfigError(f"[verify] envelope_alpha={v['envelope_alpha']:g} must exceed alpha0={nl.alpha0:g}", cfg.source)
    env = growth_envelope_check(nl, v["envelope_alpha"], v["envelope_D"], v["envelope_q"], _sample(cfg))
    rep.notes.extend(env.lines())
    for name, m in env.minimal_D.items():
        rep.result(f"envelope_minimal_D[{name}]", m)
    if env.D is not None:
        for name, ok in env.holds.items():
            rep.check(f"envelope[{name}]", ok)
    rep.termination = "passed" if rep.all_passed else "check_failure"
    return EXIT_OK if rep.all_passed else EXIT_NUMERIC


def cmd_oracle(cfg: RunConfig, out: Path | None, rep: Report) -> int:
    grid = cfg.oracle_grid()
    rows = oracle_rows(grid)
    rep.result("grid", f"L={grid.half_width:g} N={grid.n_points} boundary={grid.boundary} h={grid.spacing:.6g}")
    for r in rows:
        rep.result(r.name, r.value)
        rep.check(r.name, r.passed)
        print(r.line())
    rep.termination = "passed" if rep.all_passed else "oracle_failure"
    print(f"oracle: {sum(r.passed for r in rows)}/{len(rows)} rows pass")
    return EXIT_OK if rep.all_passed else EXIT_NUMERIC


COMMANDS = {"solve": cmd_solve, "audit": cmd_audit, "moser": cmd_moser, "verify": cmd_verify, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    keys = "\n".join(f"  {s}.{k} (default {SCHEMA[s][k][1]!r}): {SCHEMA[s][k][2]}" for s in SCHEMA for k in SCHEMA[s])
    parser = argparse.ArgumentParser(
        prog="fracnehari",
        description="Ground states of (-Delta)^(1/2) u + u = f(u) on the line.",
        epilog="config keys:\n" + keys,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", metavar="PATH", help="INI-style config file")
    parser.add_argument("--out", metavar="DIR", help="output directory (default: run.out from the config)")
    parser.add_argument("--override", metavar="SECTION.KEY=VALUE", action="append", default=[],
                        help="override one config key (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rep = Report(args.command, None)
    try:
        cfg = load_config(args.config, args.override)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep.cfg = cfg
    out = Path(args.out or cfg["run"]["out"])
    if args.command == "oracle" and args.out is None and args.config is None:
        out = None
    code = EXIT_NUMERIC
    try:
        code = COMMANDS[args.command](cfg, out, rep)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        rep.termination = "config_error"
        code = EXIT_CONFIG
    except (NumericalOverflow, ProjectionFailure) as exc:
        rep.termination = "overflow" if isinstance(exc, NumericalOverflow) else "projection_failure"
        rep.notes.append(str(exc))
        print(f"numeric failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    finally:
        rep.write(out)
    if args.command != "oracle" and rep.checks:
        print(rep.table())
    print(f"{args.command}: termination={rep.termination} exit={code}")
    return code


if __name__ == "__main__":
    sys.exit(main())

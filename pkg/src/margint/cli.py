"""Command-line front end: fit, bands, simulate, validate-kernel.

The CLI is a thin shell over the library: every command builds its
objects through the same public constructors the tests use, computes
everything in memory, and only then writes output files, so invalid
inputs never leave partial artifacts behind.  Exit codes: 0 success,
1 validation error, 2 assertion failure (``simulate --assert``).
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .config import (ConfigError, RunConfig, parse_config, parse_intervals,
                     plan_kwargs, render_config, validate_config)
from .density import EvaluationDomain, Sample, kde_fit
from .inference import (band_halfwidth, component_band, nuisance_bandwidth,
                        variance_field)
from .kernels import ProductKernel, by_name, density_kernel, verify_order
from .marginal import additive_fit, bump_integration_density, component_to_csv_rows
from .regression import make_default_plan, validate_plan
from .reports import write_curve_csv, write_records_csv, write_summary_json
from .simulation import (DESIGNS, run_coverage, run_dimensionality_bench,
                         run_theorem1, run_theorem2)


class ValidationFailure(Exception):
    """Input or configuration problem; maps to exit code 1."""


def _load_config(path, seed):
    cfg = parse_config(path) if path else RunConfig()
    if path is None:
        validate_config(cfg)
    if seed is not None:
        cfg.seed = int(seed)
    return cfg


def _read_csv(path) -> Sample:
    path = Path(path)
    if not path.exists():
        raise ValidationFailure(f"data file not found: {path}")
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationFailure(f"{path}: file is empty, expected a header row")
        width = len(header)
        if width < 3:
            raise ValidationFailure(
                f"{path}: need at least 3 columns (x1, x2, y), found {width}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ValidationFailure(
                    f"{path}: row {lineno} has {len(row)} fields, expected {width}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValidationFailure(
                    f"{path}: row {lineno} contains a non-numeric field") from None
    if not rows:
        raise ValidationFailure(f"{path}: no data rows after the header")
    arr = np.asarray(rows, dtype=float)
    try:
        return Sample(x=arr[:, :-1], y=arr[:, -1])
    except ValueError as exc:
        raise ValidationFailure(f"{path}: {exc}") from None


def _auto_domain(sample: Sample, cfg: RunConfig):
    """Evaluation boxes and weight supports, from config or from the data."""
    inner = parse_intervals(cfg.inner, sample.d, "inner domain")
    if inner is None:
        lo = sample.x.min(axis=0)
        hi = sample.x.max(axis=0)
        span = hi - lo
        if np.any(span <= 0):
            raise ValidationFailure("a covariate column is constant; cannot "
                                    "derive an evaluation domain from it")
        inner = tuple((lo[j] + 0.1 * span[j], hi[j] - 0.1 * span[j])
                      for j in range(sample.d))
    inner_arr = np.asarray(inner, dtype=float)
    pad = 0.05 * (inner_arr[:, 1] - inner_arr[:, 0])
    outer = np.stack([np.minimum(sample.x.min(axis=0), inner_arr[:, 0]) - pad,
                      np.maximum(sample.x.max(axis=0), inner_arr[:, 1]) + pad],
                     axis=1)
    domain = EvaluationDomain(inner=inner_arr, outer=outer)
    q_supports = parse_intervals(cfg.q_supports, sample.d, "q_supports")
    if q_supports is None:
        shrink = 0.0625 * (inner_arr[:, 1] - inner_arr[:, 0])
        q_supports = tuple((inner_arr[j, 0] + shrink[j], inner_arr[j, 1] - shrink[j])
                           for j in range(sample.d))
    return domain, q_supports


def _build_fit(sample: Sample, cfg: RunConfig):
    """Shared pipeline of cmd_fit and cmd_bands; returns all intermediates."""
    domain, q_supports = _auto_domain(sample, cfg)
    k = cfg.kernel_order
    base = by_name(cfg.kernel_name, order=k)
    kernels = ProductKernel((base,) * sample.d)
    dens_k = density_kernel(by_name(cfg.kernel_name), sample.d, k)
    q = bump_integration_density(q_supports, k=k)
    plan = make_default_plan(sample.n, sample.d, k, equal_h=cfg.equal_h,
                             **plan_kwargs(cfg))
    problems = validate_plan(plan)
    if problems:
        raise ValidationFailure("bandwidth plan rejected: " + "; ".join(problems))
    if cfg.floor <= 0:
        raise ValidationFailure("fit requires a positive density floor")
    density = kde_fit(sample, dens_k, plan.ell, floor=cfg.floor)
    grids = [domain.inner_grid(l, cfg.component_points) for l in range(sample.d)]
    fit = additive_fit(sample, q, kernels, plan, grids,
                       constant_source=cfg.constant_source, density=density,
                       domain=domain, n_nodes=cfg.quad_nodes)
    return fit, plan, density, q, kernels, domain, grids


def _fit_summary(sample, cfg, fit, plan):
    return {
        "n": sample.n,
        "d": sample.d,
        "mu_n": fit.mu_n,
        "constant_source": fit.constant_source,
        "kernel": {"name": cfg.kernel_name, "order": cfg.kernel_order},
        "bandwidths": {"h_axes": [float(h) for h in plan.h_axes],
                       "ell": plan.ell, "h_single": plan.h_single},
        "floor": cfg.floor,
        "component_points": cfg.component_points,
    }


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


@click.group()
def main():
    """Additive kernel regression by marginal integration."""


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="INI configuration file.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the configured seed.")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), default=".",
                      help="Output directory (created if missing).")(fn)
    return fn


def _run(body):
    try:
        body()
    except (ValidationFailure, ConfigError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    sys.exit(0)


@main.command("fit")
@click.argument("csv_path", type=click.Path())
@_common_options
def cmd_fit(csv_path, config_path, seed, out_dir):
    """Fit additive components from a CSV file (x1..xd, y)."""

    def body():
        cfg = _load_config(config_path, seed)
        sample = _read_csv(csv_path)
        fit, plan, *_ = _build_fit(sample, cfg)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for comp in fit.components:
            write_curve_csv(out / f"component_axis{comp.axis}.csv",
                            ("axis", "x", "eta_hat"),
                            component_to_csv_rows(comp))
        _write_json(out / "fit_summary.json", _fit_summary(sample, cfg, fit, plan))
        click.echo(f"fit written to {out} (mu_n = {fit.mu_n!r})")

    _run(body)


@main.command("bands")
@click.argument("csv_path", type=click.Path())
@_common_options
def cmd_bands(csv_path, config_path, seed, out_dir):
    """Fit components plus variance-based confidence bands.

    Bands need a common bandwidth across axes; the plan is forced to
    equal per-axis bandwidths for this command.
    """

    def body():
        cfg = _load_config(config_path, seed)
        cfg.equal_h = True
        sample = _read_csv(csv_path)
        fit, plan, density, q, kernels, domain, grids = _build_fit(sample, cfg)
        bands = []
        clipped = 0
        for l, comp in enumerate(fit.components):
            hv = nuisance_bandwidth(sample.n, plan.h_axes[l])
            sigma_sq, diag = variance_field(sample, density, kernels, plan, q,
                                            grids[l], axis=l, x_bandwidth=hv)
            hw = band_halfwidth(sigma_sq, plan, kernels.factors[l], sample.n,
                                axis=l)
            bands.append(component_band(comp, hw))
            clipped += diag["clipped_negative"]

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for l, band in enumerate(bands):
            rows = zip(band.grid, band.center, band.halfwidth,
                       band.lower, band.upper)
            write_curve_csv(out / f"band_axis{l}.csv",
                            ("x", "center", "halfwidth", "lower", "upper"),
                            ((float(a), float(b), float(c), float(d), float(e))
                             for a, b, c, d, e in rows))

        # additive envelope on a coarse tensor grid of the inner box
        coarse = [domain.inner_grid(l, cfg.tensor_points) for l in range(sample.d)]
        lower = np.full([cfg.tensor_points] * sample.d, fit.mu_n)
        upper = lower.copy()
        for l, band in enumerate(bands):
            idx = [None] * sample.d
            idx[l] = slice(None)
            lower = lower + np.interp(coarse[l], band.grid, band.lower)[tuple(idx)]
            upper = upper + np.interp(coarse[l], band.grid, band.upper)[tuple(idx)]
        mesh = np.meshgrid(*coarse, indexing="ij")
        header = tuple(f"x{l + 1}" for l in range(sample.d)) + ("lower", "upper")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        rows = ((*map(float, pt), float(lo), float(hi))
                for pt, lo, hi in zip(pts, lower.ravel(), upper.ravel()))
        write_curve_csv(out / "additive_band.csv", header, rows)

        summary = _fit_summary(sample, cfg, fit, plan)
        summary["clipped_negative_variance"] = clipped
        _write_json(out / "bands_summary.json", summary)
        click.echo(f"bands written to {out}")

    _run(body)


_EXPERIMENTS = {
    "theorem1": run_theorem1,
    "theorem2": run_theorem2,
    "coverage": run_coverage,
    "dimension_bench": run_dimensionality_bench,
}


def assertion_failures(report) -> list[str]:
    """Threshold checks used by ``simulate --assert``.

    Trend checks follow the experiment's purpose: sup-statistic relative
    errors must shrink with n, wide-band coverage must reach 0.90 and
    dominate the narrow band, and the additive estimator must win the
    dimension benchmark in at least 70 percent of replications.
    """
    per_n = report.summary["per_n"]
    ns = [str(n) for n in report.config["n_list"]]
    fails = []
    if report.name in ("theorem1", "theorem2"):
        for key in ("median_rel_err_plus", "median_rel_err_minus"):
            errs = [per_n[n][key] for n in ns]
            if any(b >= a for a, b in zip(errs, errs[1:])):
                fails.append(f"{key} not strictly decreasing: {errs}")
            if report.name == "theorem1" and errs[-1] >= 0.35:
                fails.append(f"{key} at n={ns[-1]} is {errs[-1]:.3f}, needs < 0.35")
    elif report.name == "coverage":
        wide = [per_n[n]["coverage_wide"] for n in ns]
        narrow = [per_n[n]["coverage_narrow"] for n in ns]
        if any(b < a for a, b in zip(wide, wide[1:])):
            fails.append(f"wide-band coverage not non-decreasing: {wide}")
        if wide[-1] < 0.90:
            fails.append(f"wide-band coverage at n={ns[-1]} is {wide[-1]:.3f}, needs >= 0.90")
        if any(b > a for a, b in zip(narrow, narrow[1:])):
            fails.append(f"narrow-band coverage not non-increasing: {narrow}")
        if any(nv >= wv for nv, wv in zip(narrow, wide)):
            fails.append(f"narrow-band coverage not strictly below wide: {narrow} vs {wide}")
    elif report.name == "dimension_bench":
        for n in ns:
            frac = per_n[n]["additive_win_fraction"]
            if frac < 0.70:
                fails.append(f"additive win fraction at n={n} is {frac:.2f}, needs >= 0.70")
    return fails


@main.command("simulate")
@click.option("--assert", "do_assert", is_flag=True, default=False,
              help="Exit 2 when the configured thresholds fail.")
@_common_options
def cmd_simulate(do_assert, config_path, seed, out_dir):
    """Run the configured Monte Carlo experiment and write its reports."""
    try:
        cfg = _load_config(config_path, seed)
        if cfg.design not in DESIGNS:
            raise ValidationFailure(
                f"unknown design {cfg.design!r}; known: {sorted(DESIGNS)}")
        design = DESIGNS[cfg.design]()
        runner = _EXPERIMENTS[cfg.experiment]
        kwargs = {"n_list": cfg.n_list, "reps": cfg.reps, "seed": cfg.seed,
                  "plan_kwargs": plan_kwargs(cfg)}
        if cfg.experiment == "coverage":
            kwargs["epsilon"] = cfg.epsilon
        if cfg.experiment != "dimension_bench":
            kwargs["grid_points"] = cfg.component_points
        report = runner(design, **kwargs)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records_csv(report, out / f"{cfg.experiment}_records.csv")
        write_summary_json(report, out / f"{cfg.experiment}_summary.json")
        click.echo(f"{cfg.experiment} reports written to {out}")
    except (ValidationFailure, ConfigError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if do_assert:
        fails = assertion_failures(report)
        if fails:
            for f in fails:
                click.echo(f"assertion failed: {f}", err=True)
            sys.exit(2)
    sys.exit(0)


@main.command("validate-kernel")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="INI configuration file.")
def cmd_validate_kernel(config_path):
    """Print the moment table of the configured kernel."""

    def body():
        cfg = _load_config(config_path, None)
        kernel = by_name(cfg.kernel_name, order=cfg.kernel_order)
        report = verify_order(kernel, cfg.kernel_order)
        click.echo(f"kernel {kernel.name}: declared order {cfg.kernel_order}")
        click.echo(f"{'j':>3}  {'moment':>24}  {'target':>8}  ok")
        for j, mu in enumerate(report.moments):
            target = 1.0 if j == 0 else 0.0
            ok = "no" if j in report.failures else "yes"
            click.echo(f"{j:>3}  {mu:>24.16e}  {target:>8.1f}  {ok}")
        click.echo("PASS" if report.passed else "FAIL")

    _run(body)


@main.command("print-config")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="INI configuration file.")
def cmd_print_config(config_path):
    """Print the effective configuration (defaults merged with the file)."""

    def body():
        cfg = _load_config(config_path, None)
        click.echo(render_config(cfg), nl=False)

    _run(body)


if __name__ == "__main__":
    main()

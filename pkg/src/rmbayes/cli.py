"""Command-line interface: Bayes factors from summary statistics, ANOVA on
CSV data, the Monte Carlo grid, and scanning text for reported F statistics.

Exit codes: 0 success, 2 validation failure, 3 I/O failure.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from datetime import datetime, timezone

import click
import numpy as np

from . import __version__
from .anova import DesignSpec, rm_anova
from .apa import parse_reports, infer_rm_design
from .bayes import SummaryStats, bf01_minimal_rm, delta_bic_nathoo
from .errors import DomainError
from .simulate import GridReport, run_grid

_SCHEMA_VERSION = 1


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def _manifest(command: str, params: dict, seed: int | None = None) -> dict:
    manifest = {
        "command": command,
        "artifact_version": __version__,
        "schema_version": _SCHEMA_VERSION,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "params": params,
    }
    if seed is not None:
        manifest["seed"] = seed
    return manifest


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _validation_exit(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _io_exit(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(3)


class UInt64(click.ParamType):
    """Unsigned 64-bit integer, accepted as decimal or 0x-prefixed hex."""

    name = "uint64"

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            parsed = value
        else:
            try:
                parsed = int(str(value), 0)
            except ValueError:
                self.fail(f"{value!r} is not a decimal or 0x-hex integer", param, ctx)
        if not 0 <= parsed < 2 ** 64:
            self.fail(f"{value!r} does not fit in an unsigned 64-bit integer", param, ctx)
        return parsed


UINT64 = UInt64()


def _render_evidence(result, label: str) -> list[str]:
    return [
        f"method      : {label}",
        f"BF01        : {_fmt(result.bf01)}",
        f"BF10        : {_fmt(result.bf10)}",
        f"dBIC10      : {_fmt(result.delta_bic10)}",
        f"p(H0 | y)   : {_fmt(result.posterior_h0)}",
        f"p(H1 | y)   : {_fmt(result.posterior_h1)}   (prior p(H0) = {result.prior_h0:g})",
    ]


@click.group()
@click.version_option(version=__version__, prog_name="rmbayes")
def main() -> None:
    """Bayes factors for repeated-measures ANOVA from minimal summary
    statistics."""


@main.command("bf")
@click.option("--f", "f_stat", type=float, required=True,
              help="Observed F statistic for the treatment effect.")
@click.option("--n", "n_subjects", type=int, required=True, help="Number of subjects.")
@click.option("--k", "k_conditions", type=int, required=True,
              help="Number of repeated-measures conditions.")
@click.option("--prior-h0", type=float, default=0.5, show_default=True,
              help="Prior probability of the null model.")
@click.option("--json", "as_json", is_flag=True, help="Emit a machine-readable JSON report.")
def cmd_bf(f_stat: float, n_subjects: int, k_conditions: int, prior_h0: float,
           as_json: bool) -> None:
    """Bayes factor from F, n and k alone (minimal BIC method)."""
    try:
        design = DesignSpec(n=n_subjects, k=k_conditions)
        result = bf01_minimal_rm(f_stat, design, prior_h0=prior_h0)
    except DomainError as exc:
        _validation_exit(str(exc))
    manifest = _manifest("bf", {
        "f": f_stat, "n": n_subjects, "k": k_conditions, "prior_h0": prior_h0,
    })
    if as_json:
        _echo_json({"manifest": manifest, "evidence": result.to_dict()})
        return
    click.echo(f"F = {f_stat:g}, n = {n_subjects}, k = {k_conditions}")
    for line in _render_evidence(result, "minimal BIC (repeated measures)"):
        click.echo(line)


@main.command("bf-ss")
@click.option("--sst", type=float, required=True, help="Total sum of squares.")
@click.option("--ssa", type=float, required=True, help="Treatment sum of squares.")
@click.option("--ssb", type=float, required=True, help="Subject sum of squares.")
@click.option("--n", "n_subjects", type=int, required=True, help="Number of subjects.")
@click.option("--k", "k_conditions", type=int, required=True,
              help="Number of repeated-measures conditions.")
@click.option("--prior-h0", type=float, default=0.5, show_default=True,
              help="Prior probability of the null model.")
@click.option("--json", "as_json", is_flag=True, help="Emit a machine-readable JSON report.")
def cmd_bf_ss(sst: float, ssa: float, ssb: float, n_subjects: int, k_conditions: int,
              prior_h0: float, as_json: bool) -> None:
    """Bayes factor from sums of squares (Nathoo-Masson method)."""
    try:
        design = DesignSpec(n=n_subjects, k=k_conditions)
        stats = SummaryStats(ss_treatment=ssa, ss_subjects=ssb, ss_total=sst, design=design)
        result = delta_bic_nathoo(stats, prior_h0=prior_h0)
    except DomainError as exc:
        _validation_exit(str(exc))
    manifest = _manifest("bf-ss", {
        "sst": sst, "ssa": ssa, "ssb": ssb,
        "n": n_subjects, "k": k_conditions, "prior_h0": prior_h0,
    })
    if as_json:
        _echo_json({"manifest": manifest, "evidence": result.to_dict()})
        return
    click.echo(f"SST = {sst:g}, SSA = {ssa:g}, SSB = {ssb:g}, n = {n_subjects}, k = {k_conditions}")
    for line in _render_evidence(result, "Nathoo-Masson (sums of squares)"):
        click.echo(line)
    if ssa == 0:
        click.echo("note: the treatment sum of squares is 0; the treatment explains nothing")


def _read_wide_csv(path: str) -> np.ndarray:
    """Wide-format CSV: header row, one row per subject, k numeric columns.
    Content problems raise DomainError; OSError propagates to the caller."""
    with open(path, newline="", encoding="utf-8") as handle:
        rows = [row for row in csv.reader(handle) if any(cell.strip() for cell in row)]
    if len(rows) < 3:
        raise DomainError("CSV needs a header row and at least 2 subject rows")
    width = len(rows[0])
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DomainError(f"row {lineno} has {len(row)} cells, expected {width}")
        try:
            data.append([float(cell) for cell in row])
        except ValueError:
            raise DomainError(f"row {lineno} contains a non-numeric cell") from None
    return np.asarray(data, dtype=float)


def _render_anova_table(table) -> list[str]:
    ms_subjects = table.ss_subjects / table.df_subjects
    df_total = table.df_treatment + table.df_subjects + table.df_residual
    rows = [
        ("Source", "SS", "df", "MS", "F", "p"),
        ("Subjects", _fmt(table.ss_subjects), str(table.df_subjects), _fmt(ms_subjects), "", ""),
        ("Treatment", _fmt(table.ss_treatment), str(table.df_treatment),
         _fmt(table.ms_treatment), _fmt(table.f_stat), _fmt(table.p_value)),
        ("Residual", _fmt(table.ss_residual), str(table.df_residual),
         _fmt(table.ms_residual), "", ""),
        ("Total", _fmt(table.ss_total), str(df_total), "", "", ""),
    ]
    widths = [max(len(row[col]) for row in rows) for col in range(6)]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells += [row[col].rjust(widths[col]) for col in range(1, 6)]
        lines.append("  ".join(cells).rstrip())
    return lines


@main.command("anova")
@click.argument("csv_path", type=click.Path(dir_okay=False))
@click.option("--bf", "with_bf", is_flag=True,
              help="Append Bayes factors from both methods.")
@click.option("--json", "as_json", is_flag=True, help="Emit a machine-readable JSON report.")
def cmd_anova(csv_path: str, with_bf: bool, as_json: bool) -> None:
    """Repeated-measures ANOVA of a wide-format CSV (one row per subject)."""
    try:
        data = _read_wide_csv(csv_path)
    except OSError as exc:
        _io_exit(str(exc))
    except DomainError as exc:
        _validation_exit(str(exc))
    try:
        table = rm_anova(data)
        n, k = data.shape
        design = DesignSpec(n=int(n), k=int(k))
        evidence = None
        if with_bf:
            evidence = {
                "minimal_rm": bf01_minimal_rm(table.f_stat, design),
                "nathoo_masson": delta_bic_nathoo(SummaryStats(
                    ss_treatment=table.ss_treatment,
                    ss_subjects=table.ss_subjects,
                    ss_total=table.ss_total,
                    design=design,
                )),
            }
    except DomainError as exc:
        _validation_exit(str(exc))
    manifest = _manifest("anova", {"csv_path": csv_path, "bf": with_bf})
    if as_json:
        _echo_json({
            "manifest": manifest,
            "design": {"n": design.n, "k": design.k},
            "anova": table.to_dict(),
            "evidence": None if evidence is None else {
                key: value.to_dict() for key, value in evidence.items()
            },
        })
        return
    click.echo(f"n = {design.n} subjects, k = {design.k} conditions")
    for line in _render_anova_table(table):
        click.echo(line)
    if evidence is not None:
        click.echo("")
        for line in _render_evidence(evidence["minimal_rm"], "minimal BIC (repeated measures)"):
            click.echo(line)
        click.echo("")
        for line in _render_evidence(evidence["nathoo_masson"], "Nathoo-Masson (sums of squares)"):
            click.echo(line)


def _parse_number_list(raw: str, cast, label: str) -> tuple:
    try:
        values = tuple(cast(item.strip()) for item in raw.split(",") if item.strip())
    except ValueError:
        raise DomainError(f"could not parse {label} list {raw!r}") from None
    if not values:
        raise DomainError(f"{label} list is empty")
    return values


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_grid_outputs(report: GridReport, out_dir: str, manifest: dict,
                        emit_per_rep: bool) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def target(name: str) -> str:
        written.append(name)
        return os.path.join(out_dir, name)

    with open(target("grid_report.json"), "w", encoding="utf-8") as handle:
        json.dump({"manifest": manifest, **report.to_dict()}, handle,
                  indent=2, sort_keys=True)
        handle.write("\n")

    key = ["delta", "rho", "n"]
    _write_csv(target("table2.csv"), key + ["accuracy_min", "accuracy_nm"],
               [[c.config.delta, c.config.rho, c.config.n, c.accuracy_min, c.accuracy_nm]
                for c in report.cells])
    _write_csv(target("table3.csv"), key + ["consistency"],
               [[c.config.delta, c.config.rho, c.config.n, c.consistency]
                for c in report.cells])
    _write_csv(target("table4.csv"), key + ["posterior_correlation"],
               [[c.config.delta, c.config.rho, c.config.n,
                 "" if c.posterior_correlation is None else c.posterior_correlation]
                for c in report.cells])

    boxplot_rows = []
    for cell in report.cells:
        for method, quantiles in (("minimal_rm", cell.posterior_quantiles_min),
                                  ("nathoo_masson", cell.posterior_quantiles_nm)):
            q = quantiles.to_dict()
            boxplot_rows.append([cell.config.delta, cell.config.rho, cell.config.n, method,
                                 q["min"], q["q1"], q["median"], q["q3"], q["max"]])
    _write_csv(target("boxplot_data.csv"),
               key + ["method", "min", "q1", "median", "q3", "max"], boxplot_rows)

    scatter_rows = [
        [cell.cell_id, cell.config.delta, cell.config.rho, cell.config.n,
         record.rep, record.posterior_min, record.posterior_nm]
        for cell in report.cells for record in (cell.per_rep_records or ())
    ]
    _write_csv(target("scatter_data.csv"),
               ["cell_id"] + key + ["rep", "posterior_min", "posterior_nm"], scatter_rows)

    if emit_per_rep:
        per_rep_rows = [
            [cell.cell_id, record.rep, record.f_stat, record.bf01_min, record.bf01_nm,
             record.posterior_min, record.posterior_nm,
             record.choice_min.value, record.choice_nm.value]
            for cell in report.cells for record in (cell.per_rep_records or ())
        ]
        _write_csv(target("per_rep.csv"),
                   ["cell_id", "rep", "f_stat", "bf01_min", "bf01_nm",
                    "posterior_min", "posterior_nm", "choice_min", "choice_nm"],
                   per_rep_rows)
    return written


@main.command("simulate")
@click.option("--n", "n_list", default="20,50,80", show_default=True,
              help="Comma-separated subject counts.")
@click.option("--rho", "rho_list", default="0.2,0.8", show_default=True,
              help="Comma-separated intraclass correlations.")
@click.option("--delta", "delta_list", default="0,0.2,0.5", show_default=True,
              help="Comma-separated effect sizes.")
@click.option("--k", type=int, default=3, show_default=True,
              help="Number of repeated-measures conditions.")
@click.option("--reps", type=int, default=1000, show_default=True,
              help="Replications per cell.")
@click.option("--seed", type=UINT64, default=0, show_default=True,
              help="Master seed (decimal or 0x-hex).")
@click.option("--spacing", type=click.Choice(["uniform", "equal"]), default="uniform",
              show_default=True,
              help="Placement of interior condition means: redrawn uniformly per "
                   "replication, or fixed equally spaced.")
@click.option("--out-dir", envvar="RMBAYES_OUT_DIR", default=".", show_default=True,
              help="Output directory (environment variable RMBAYES_OUT_DIR overrides "
                   "the default).")
@click.option("--emit-per-rep", is_flag=True,
              help="Also write per_rep.csv with one row per replication.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker processes for cells (results are identical at any count).")
def cmd_simulate(n_list: str, rho_list: str, delta_list: str, k: int, reps: int,
                 seed: int, spacing: str, out_dir: str, emit_per_rep: bool,
                 workers: int) -> None:
    """Run the Monte Carlo grid comparing both Bayes factor methods."""
    try:
        n_values = _parse_number_list(n_list, int, "subject-count")
        rho_values = _parse_number_list(rho_list, float, "correlation")
        delta_values = _parse_number_list(delta_list, float, "effect-size")
        if workers < 1:
            raise DomainError(f"workers must be >= 1, got {workers}")
        report = run_grid(n_values, rho_values, delta_values, k=k, reps=reps,
                          master_seed=seed, spacing=spacing, workers=workers,
                          keep_records=True)
    except DomainError as exc:
        _validation_exit(str(exc))
    manifest = _manifest("simulate", {
        "n_values": list(n_values), "rho_values": list(rho_values),
        "delta_values": list(delta_values), "k": k, "reps": reps,
        "spacing": spacing, "out_dir": out_dir, "emit_per_rep": emit_per_rep,
        "workers": workers,
    }, seed=seed)
    try:
        written = _write_grid_outputs(report, out_dir, manifest, emit_per_rep)
    except OSError as exc:
        _io_exit(str(exc))
    click.echo(f"wrote {', '.join(written)} in {out_dir}")
    click.echo("")
    header = f"{'cell':<32}{'acc_min':>8}{'acc_nm':>8}{'consist':>9}{'corr':>7}"
    click.echo(header)
    for cell in report.cells:
        label = (f"delta={cell.config.delta:g} rho={cell.config.rho:g} "
                 f"n={cell.config.n}")
        corr = "n/a" if cell.posterior_correlation is None else _fmt(cell.posterior_correlation)
        click.echo(f"{label:<32}{_fmt(cell.accuracy_min):>8}{_fmt(cell.accuracy_nm):>8}"
                   f"{_fmt(cell.consistency):>9}{corr:>7}")


def _describe_stat(stat) -> str:
    relation = "<" if stat.f_is_upper_bound else "="
    return f"F({stat.df1:g}, {stat.df2:g}) {relation} {stat.f_value:g}"


@main.command("parse")
@click.argument("text_path", required=False, type=click.Path(dir_okay=False, allow_dash=True))
@click.option("--assume-rm/--no-assume-rm", default=True, show_default=True,
              help="Invert df1/df2 into (n, k) for a one-factor repeated-measures design.")
@click.option("--prior-h0", type=float, default=0.5, show_default=True,
              help="Prior probability of the null model.")
@click.option("--json", "as_json", is_flag=True, help="Emit a machine-readable JSON report.")
def cmd_parse(text_path: str | None, assume_rm: bool, prior_h0: float,
              as_json: bool) -> None:
    """Scan text for reported F statistics and estimate Bayes factors.

    Reads TEXT_PATH, or standard input when the path is omitted or '-'.
    """
    try:
        if text_path in (None, "-"):
            text = click.get_text_stream("stdin").read()
        else:
            with open(text_path, encoding="utf-8") as handle:
                text = handle.read()
    except OSError as exc:
        _io_exit(str(exc))
    stats = parse_reports(text)

    entries = []
    for stat in stats:
        entry = stat.to_dict()
        entry.update({"design": None, "evidence": None, "error": None})
        if assume_rm:
            try:
                design = infer_rm_design(stat)
                result = bf01_minimal_rm(stat.f_value, design, prior_h0=prior_h0)
                entry["design"] = {"n": design.n, "k": design.k}
                entry["evidence"] = result.to_dict()
            except DomainError as exc:
                entry["error"] = str(exc)
        entries.append((stat, entry))

    manifest = _manifest("parse", {
        "text_path": text_path or "-", "assume_rm": assume_rm, "prior_h0": prior_h0,
    })
    if as_json:
        _echo_json({"manifest": manifest, "reports": [entry for _, entry in entries]})
        return
    if not entries:
        click.echo("no F reports found")
        return
    for stat, entry in entries:
        left = _describe_stat(stat)
        if entry["evidence"] is not None:
            design = entry["design"]
            evidence = entry["evidence"]
            bound = ">=" if stat.f_is_upper_bound else "="
            note = "  (lower bound: F reported as an upper bound)" if stat.f_is_upper_bound else ""
            click.echo(f"{left:<28} n={design['n']}  k={design['k']}  "
                       f"BF01 {bound} {_fmt(evidence['bf01'])}  "
                       f"p(H0|y) = {_fmt(evidence['posterior_h0'])}{note}")
        elif entry["error"] is not None:
            click.echo(f"{left:<28} not inferable: {entry['error']}")
        else:
            click.echo(left)


if __name__ == "__main__":
    main()

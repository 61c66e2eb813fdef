"""CSV artifacts and atomic file writing.

Every CSV starts with the fully resolved configuration as `# key = value`
comment lines, then an RFC-4180 header row and data rows.  Floats are
written with repr (shortest round-trip), so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile

import numpy as np

__all__ = [
    "atomic_write_text",
    "render_csv",
    "write_trials_csv",
    "write_summary_csv",
    "write_landscape_csv",
    "write_sweep_csv",
    "read_config_header",
]

TRIALS_HEADER = ["trial_id", "seed", "final_w", "tail_avg_w", "tail_avg_v", "diverged"]
SUMMARY_HEADER = ["preset", "N", "T", "eta", "vstar", "mean_abs_final", "se_final",
                  "mean_abs_tailavg", "se_tailavg", "time_avg_mse", "sgd_bound",
                  "avg_bound", "verdict_a", "verdict_b", "trapped_fraction"]
LANDSCAPE_HEADER = ["v", "f", "F", "Fgrad"]
SWEEP_HEADER = ["eta", "mean_abs_tailavg", "se", "sqrt_time_avg_mse", "se2"]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return str(x)


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory plus rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(header: list[str], rows, config: dict[str, str] | None = None) -> str:
    buf = io.StringIO()
    if config:
        for k in sorted(config):
            buf.write(f"# {k} = {config[k]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def write_trials_csv(path, report, config=None) -> None:
    rows = []
    alive_iter = iter(zip(report.final_w, report.tail_avg_w, report.tail_avg_v))
    for i, traj in enumerate(report.trajectories):
        if traj.diverged:
            rows.append([i, report.seeds[i], traj.final_w, traj.tail_avg_w,
                         traj.tail_avg_v, True])
        else:
            f, tw, tv = next(alive_iter)
            rows.append([i, report.seeds[i], f, tw, tv, False])
    atomic_write_text(path, render_csv(TRIALS_HEADER, rows, config))


def summary_row(preset, report, run, verdicts=None):
    return [preset or "custom", report.trials, run.T, run.eta, report.vstar,
            report.mean_abs_final, report.se_abs_final,
            report.mean_abs_tailavg, report.se_abs_tailavg,
            report.time_avg_mse,
            verdicts.sgd_total if verdicts else "",
            verdicts.avg_total if verdicts else "",
            verdicts.verdict_a if verdicts else "",
            verdicts.verdict_b if verdicts else "",
            report.trapped_fraction]


def write_summary_csv(path, rows, config=None) -> None:
    atomic_write_text(path, render_csv(SUMMARY_HEADER, rows, config))


def write_landscape_csv(path, v, f, F, Fgrad, config=None) -> None:
    rows = zip(v, f, F, Fgrad)
    atomic_write_text(path, render_csv(LANDSCAPE_HEADER, rows, config))


def write_sweep_csv(path, sweep, config=None) -> None:
    rows = zip(sweep.etas, sweep.mean_abs_tailavg, sweep.se_tailavg,
               sweep.sqrt_time_avg_mse, sweep.se_sqrt_mse)
    atomic_write_text(path, render_csv(SWEEP_HEADER, rows, config))


def read_config_header(path: str) -> dict[str, str]:
    """Recover the `# key = value` comment header of a CSV artifact."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            key, _, value = body.partition("=")
            out[key.strip()] = value.strip()
    return out

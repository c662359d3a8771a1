"""Plain-text tables written next to the binary artifacts."""
import math

import numpy as np

from .quadform import data_dim


def _fmt(value):
    return 'inf' if not math.isfinite(value) else f"{value:.10e}"


def search_report_text(report, config_text=''):
    lines = [
        f"# bound B = {report.bound:.10e} (tau = {report.config.tau:g})",
        f"# grid winner: lambda1 = {report.grid_winner.reg.lambda1:.10e}, "
        f"lambda2 = {report.grid_winner.reg.lambda2:.10e}, error = {_fmt(report.grid_winner.error)}",
        f"# winner: lambda1 = {report.winner.reg.lambda1:.10e}, "
        f"lambda2 = {report.winner.reg.lambda2:.10e}, error = {_fmt(report.winner.error)}",
        f"# evaluations = {len(report.evaluations)}, bound disqualified = {report.disqualified}, "
        f"integrator failed = {report.failed}",
        f"{'stage':<8} {'lambda1':>17} {'lambda2':>17} {'error':>17}  status",
    ]
    for evaluation in report.evaluations:
        lines.append(
            f"{evaluation.stage.value:<8} {evaluation.reg.lambda1:>17.10e} {evaluation.reg.lambda2:>17.10e} "
            f"{_fmt(evaluation.error):>17}  {evaluation.status}"
        )
    if config_text:
        lines.append('')
        lines.append('# configuration')
        lines.extend(f"# {line}" for line in config_text.splitlines())
    return '\n'.join(lines) + '\n'


def series_text(times, values, header='value'):
    """One ``time value`` pair per line."""
    lines = [f"# time {header}"]
    lines.extend(f"{t:.10e} {v:.10e}" for t, v in zip(np.asarray(times), np.asarray(values)))
    return '\n'.join(lines) + '\n'


def rank_report_text(rows, m):
    """Rows of (threshold, r, energy); d is data_dim(r, m)."""
    lines = [f"{'threshold':>10} {'r':>6} {'d':>8} {'energy':>12}"]
    for threshold, r, energy in rows:
        lines.append(f"{threshold:>10.4f} {r:>6d} {data_dim(r, m):>8d} {energy:>12.8f}")
    return '\n'.join(lines) + '\n'


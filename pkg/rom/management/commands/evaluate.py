import numpy as np

from rom.artifacts import load_trained, load_trajectory
from rom.exceptions import DimensionError
from rom.oracle import (
    prediction_error_series, projection_error_series, reconstruct_native, relative_state_error,
)
from rom.pod import bound_factors
from rom.preprocess import apply_scaling, apply_transform
from rom.reports import series_text

from ._base import OpInfCommand


class Command(OpInfCommand):
    help = 'Compare a simulated trajectory with reference snapshots: error series, monitor traces and bound checks.'
    stage = 'evaluate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('snapshots', help='Reference native snapshots (n x K) on the training time step')

    def run(self, config, out, options):
        model = load_trained(out)
        times, states, status = load_trajectory(out)
        Z = self.load(options['snapshots'])
        meta = model.metadata
        transform = model.transform
        V = model.V
        if states.shape[0] != V.shape[1]:
            raise DimensionError(f"trajectory has r={states.shape[0]}, basis has r={V.shape[1]}")

        grid_times = meta['t0'] + meta['dt'] * np.arange(Z.shape[1])
        columns = min(Z.shape[1], states.shape[1])
        if not np.allclose(times[:columns], grid_times[:columns], rtol=0, atol=1e-9 * meta['dt']):
            raise DimensionError("trajectory times do not match the snapshot time step")
        floor = config.error_floor

        summary = [f"# trajectory status: {status['status']} ({status['points']} points)"]
        for name in transform.sources:
            projerr = projection_error_series(Z, transform, model.scaling, V, name, floor)
            prederr = prediction_error_series(
                Z[:, :columns], states[:, :columns], transform, model.scaling, V, name, floor,
            )
            (out / f'projerr_{name}.txt').write_text(series_text(grid_times, projerr, f'projerr_{name}'))
            (out / f'prederr_{name}.txt').write_text(series_text(times[:columns], prederr, f'prederr_{name}'))
            summary.append(f"mean_projerr_{name} = {projerr.mean():.10e}")
            summary.append(f"mean_prederr_{name} = {prederr.mean():.10e}")

        Qs = apply_scaling(apply_transform(Z, transform), model.scaling)
        projected = V @ (V.T @ Qs)
        summary.append(
            f"relative_projection_error = {relative_state_error(Qs[:, :columns], projected[:, :columns], grid_times[:columns]):.10e}"
        )
        summary.append(
            f"relative_prediction_error = {relative_state_error(Qs[:, :columns], V @ states[:, :columns], grid_times[:columns]):.10e}"
        )

        limits = meta['bound'] * bound_factors(V)
        violations = int(np.count_nonzero(np.abs(V @ states) > limits[:, np.newaxis]))
        summary.append(f"bound_violations = {violations}")

        native = reconstruct_native(states, transform, model.scaling, V)
        for row in config.monitor_rows():
            if not 0 <= row < Z.shape[0]:
                raise DimensionError(f"monitor row {row} outside 0..{Z.shape[0] - 1}")
            lines = ["# time truth prediction"]
            for j, t in enumerate(times):
                truth = Z[row, j] if j < Z.shape[1] else np.nan
                lines.append(f"{t:.10e} {truth:.10e} {native[row, j]:.10e}")
            (out / f'monitor_{row}.txt').write_text('\n'.join(lines) + '\n')

        (out / 'evaluation.txt').write_text('\n'.join(summary) + '\n')
        return f"evaluated {columns} columns for {len(transform.sources)} variables; {violations} bound violations"

from rom.artifacts import save_trained
from rom.quadform import data_dim
from rom.regsearch import reg_opinf
from rom.reports import search_report_text
from rom.timederiv import UniformTimeGrid

from ._base import OpInfCommand


class Command(OpInfCommand):
    help = 'Learn regularized ROM operators from snapshots (full pipeline with regularization search).'
    stage = 'train'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('snapshots', help='Native snapshot matrix (n x k)')
        parser.add_argument('inputs', nargs='?', help='Input matrix (m x k); omit for autonomous systems')
        parser.add_argument('--ddts', help='Full-state time derivatives (n x k), used with derivatives = provided')
        parser.add_argument('--times', help='Snapshot times (1 x k); overrides t0 and dt from the config')

    def run(self, config, out, options):
        Z = self.load(options['snapshots'])
        U = self.load(options['inputs']) if options['inputs'] else None
        ddts = None
        if config.derivatives == 'provided':
            if not options['ddts']:
                raise ValueError("derivatives = provided needs --ddts")
            ddts = self.load(options['ddts'])

        if options['times']:
            grid = UniformTimeGrid.from_times(self.load(options['times']).reshape(-1))
        else:
            grid = config.time_grid(Z.shape[1])
        tf = config.final_time(grid)
        transform = config.transform_spec()
        signal = None
        if config.signal == 'none':
            U = None
        elif config.signal == 'pressure':
            signal = config.input_signal()
            if U is None:
                U = signal.sample(grid.times)
        result = reg_opinf(
            Z, U, tf, transform, config.r, config=config.search_config(), grid=grid,
            layout=config.layout(), signal=signal, ddts=ddts, rsvd=config.rsvd(),
            energy_threshold=config.energy_threshold,
        )
        ops, report = result.operators, result.report
        metadata = {
            'r': ops.r,
            'm': ops.m,
            'k': grid.k,
            'd': data_dim(ops.r, ops.m),
            'lambda1': report.winner.reg.lambda1,
            'lambda2': report.winner.reg.lambda2,
            'bound': result.bound,
            'tau': report.config.tau,
            'training_error': report.winner.error,
            't0': grid.t0,
            'dt': grid.dt,
            'tf': tf,
            'variables': config.variables,
            'native_variables': list(transform.sources),
            'transform': config.transform,
            'inverse_prefer': config.inverse_prefer,
        }
        save_trained(out, result, metadata)
        (out / 'search_report.txt').write_text(search_report_text(report, config.as_text()))
        return (
            f"trained r={ops.r} ROM: lambda1={report.winner.reg.lambda1:.4g}, "
            f"lambda2={report.winner.reg.lambda2:.4g}, training error {report.winner.error:.4e}"
        )

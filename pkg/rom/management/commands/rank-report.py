from rom.pod import cumulative_energy, pod, select_rank
from rom.preprocess import apply_scaling, apply_transform, fit_scaling
from rom.reports import rank_report_text

from ._base import OpInfCommand

DEFAULT_THRESHOLDS = '0.985,0.99,0.995,0.9975,0.999,0.9995,0.99975,0.9999,0.99995'


class Command(OpInfCommand):
    help = 'Tabulate the basis size needed to exceed each cumulative energy threshold.'
    stage = 'rank-report'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('snapshots', help='Native snapshot matrix (n x k)')
        parser.add_argument('--thresholds', default=DEFAULT_THRESHOLDS, help='Comma-separated energy levels')

    def run(self, config, out, options):
        thresholds = sorted(float(item) for item in options['thresholds'].split(',') if item.strip())
        Q = apply_transform(self.load(options['snapshots']), config.transform_spec())
        Q = apply_scaling(Q, fit_scaling(Q, config.layout()))
        basis = pod(Q, None, config.rsvd())
        rows = []
        for threshold in thresholds:
            r = select_rank(basis.singular_values, threshold, basis.total_energy)
            rows.append((threshold, r, cumulative_energy(basis.singular_values, r, basis.total_energy)))
        text = rank_report_text(rows, config.m)
        (out / 'rank_report.txt').write_text(text)
        self.stdout.write(text, ending='')
        return f"rank report for {len(rows)} thresholds written"

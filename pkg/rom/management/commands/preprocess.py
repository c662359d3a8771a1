from rom.artifacts import write_scaling
from rom.matrixio import write_matrix
from rom.preprocess import apply_scaling, apply_transform, fit_scaling

from ._base import OpInfCommand


class Command(OpInfCommand):
    help = 'Transform native snapshots to learning variables and fit the per-variable scaling.'
    stage = 'preprocess'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('snapshots', help='Native snapshot matrix (n x k)')

    def run(self, config, out, options):
        Z = self.load(options['snapshots'])
        Q = apply_transform(Z, config.transform_spec())
        scaling = fit_scaling(Q, config.layout())
        write_matrix(out / 'learning.oimx', apply_scaling(Q, scaling))
        write_scaling(out, scaling)
        scales = ', '.join(f"{name}={scale:g}" for name, scale in zip(scaling.names, scaling.scales))
        return f"preprocessed {Q.shape[0]}x{Q.shape[1]} snapshots ({scales})"

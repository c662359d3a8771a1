from pathlib import Path

import numpy as np

from rom.matrixio import write_matrix
from rom.pod import pod, select_rank

from ._base import OpInfCommand


class Command(OpInfCommand):
    help = 'Compute the POD basis of preprocessed learning snapshots.'
    stage = 'pod'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            'learning', nargs='?',
            help='Scaled learning snapshots (default: learning.oimx in the output directory)',
        )

    def run(self, config, out, options):
        Q = self.load(options['learning'] or Path(out) / 'learning.oimx')
        basis = pod(Q, config.r or None, config.rsvd())
        r = config.r or select_rank(basis.singular_values, config.energy_threshold, basis.total_energy)
        basis = basis.truncate(r)
        write_matrix(out / 'basis.oimx', basis.V)
        write_matrix(out / 'singular_values.oimx', np.asarray(basis.singular_values)[np.newaxis])
        return f"POD basis with r={r} captures {basis.energy():.6f} of the snapshot energy"

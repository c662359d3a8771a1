import numpy as np

from rom.artifacts import load_trained, save_trajectory
from rom.exceptions import DimensionError
from rom.rom_model import NoInput, integrate

from ._base import OpInfCommand


class Command(OpInfCommand):
    help = 'Integrate trained ROM operators from the stored initial state.'
    stage = 'simulate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('inputs', nargs='?', help='Input samples (m x K) on the training time step, for signal = sampled')
        parser.add_argument('--tf', type=float, help='Final time (default: the training final time)')
        parser.add_argument('--enforce-bound', action='store_true', help='Stop at the first violation of the trained bound')

    def run(self, config, out, options):
        model = load_trained(out)
        meta = model.metadata
        t0, dt = meta['t0'], meta['dt']
        tf = options['tf'] if options['tf'] is not None else meta['tf']
        if tf <= t0:
            raise DimensionError(f"final time {tf} must exceed t0 = {t0}")
        times = t0 + dt * np.arange(int(np.floor((tf - t0) / dt + 1e-9)) + 1)
        if tf - times[-1] > 1e-9 * dt:
            times = np.append(times, tf)

        signal = NoInput()
        if model.operators.m:
            U = self.load(options['inputs']) if options['inputs'] else None
            if config.signal == 'sampled' and U is None:
                raise DimensionError(f"the operators expect m={model.operators.m} inputs; pass an input matrix")
            signal = config.input_signal(t0 + dt * np.arange(U.shape[1]) if U is not None else None, U)

        trajectory = integrate(
            model.operators, model.initial_state, signal, times,
            rtol=config.rtol, atol=config.atol,
            bound=meta['bound'] if options['enforce_bound'] else None,
        )
        save_trajectory(out, trajectory)
        return f"simulated {trajectory.times.size} of {times.size} output times: {trajectory.status}"

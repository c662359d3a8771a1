import numpy as np

from rom.matrixio import write_matrix
from rom.oracle import burgers_grid, make_burgers_fom, simulate_fom
from rom.rom_model import NoInput

from ._base import OpInfCommand


class Command(OpInfCommand):
    help = 'Simulate the viscous Burgers full-order model and write a snapshot dataset.'
    stage = 'make-synthetic'

    def run(self, config, out, options):
        n, length, boundary = config.burgers_n, config.burgers_length, config.burgers_boundary
        fom = make_burgers_fom(n, config.burgers_viscosity, length, boundary)
        x = burgers_grid(n, length, boundary)
        if boundary == 'periodic':
            signal = NoInput()
            q0 = np.sin(2 * np.pi * x / length)
        else:
            signal = config.input_signal()
            if signal.m != 1:
                raise ValueError("the Dirichlet Burgers model needs signal = pressure for its boundary input")
            p_ref = config.signal_p_ref
            q0 = p_ref * (1.0 - x / length) + 0.5 * p_ref * np.sin(2 * np.pi * x / length)

        times = config.t0 + config.dt * np.arange(config.burgers_steps)
        Z = simulate_fom(fom, q0, signal, times)
        U = signal.sample(times) if signal.m else np.zeros((0, times.size))
        write_matrix(out / 'snapshots.oimx', Z)
        write_matrix(out / 'inputs.oimx', U)
        write_matrix(out / 'snapshot_times.oimx', times[np.newaxis])
        return f"Burgers dataset: n={n}, {times.size} snapshots, {boundary} boundary"

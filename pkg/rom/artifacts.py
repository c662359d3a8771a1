"""Reading and writing the artifacts of a run directory."""
import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from .exceptions import DimensionError
from .matrixio import read_matrix, write_matrix
from .opinf_solver import RomOperators
from .pod import bound_factors
from .preprocess import ScalingParams, TransformSpec, VariableLayout
from .serializers import OperatorMetadataSerializer, TrajectoryStatusSerializer

logger = logging.getLogger(__name__)

OPERATOR_FILES = ('c_hat', 'A_hat', 'H_hat', 'B_hat')


def write_json(path, serializer_class, data):
    serializer = serializer_class(data=data)
    serializer.is_valid(raise_exception=True)
    Path(path).write_bytes(JSONRenderer().render(serializer.validated_data, renderer_context={'indent': 2}))


def read_json(path, serializer_class):
    data = JSONParser().parse(io.BytesIO(Path(path).read_bytes()))
    serializer = serializer_class(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.validated_data


def write_scaling(out, scaling):
    write_matrix(Path(out) / 'scaling.oimx', np.asarray(scaling.scales)[np.newaxis])


def read_scaling(out, layout, n):
    scales = read_matrix(Path(out) / 'scaling.oimx').reshape(-1)
    if scales.size != len(layout.names) or n % scales.size:
        raise DimensionError(f"{scales.size} scale factors do not fit {len(layout.names)} variables and n={n}")
    return ScalingParams(layout.names, scales, n // scales.size)


@dataclass(frozen=True)
class TrainedModel:
    operators: RomOperators
    V: np.ndarray
    scaling: ScalingParams
    initial_state: np.ndarray
    metadata: dict

    @property
    def layout(self):
        return VariableLayout.parse(self.metadata['variables'])

    @property
    def transform(self):
        if not self.metadata['transform']:
            return TransformSpec.identity(self.layout.names)
        return TransformSpec.parse(
            self.metadata['native_variables'], self.metadata['transform'], self.metadata['inverse_prefer'],
        )


def save_trained(out, result, metadata):
    out = Path(out)
    ops = result.operators
    write_matrix(out / 'c_hat.oimx', ops.c_hat[:, np.newaxis])
    write_matrix(out / 'A_hat.oimx', ops.A_hat)
    write_matrix(out / 'H_hat.oimx', ops.H_hat)
    write_matrix(out / 'B_hat.oimx', ops.B_hat)
    write_matrix(out / 'initial_state.oimx', result.initial_state[:, np.newaxis])
    write_matrix(out / 'basis.oimx', result.basis.V)
    write_matrix(out / 'singular_values.oimx', np.asarray(result.basis.singular_values)[np.newaxis])
    write_matrix(out / 'bound_factors.oimx', bound_factors(result.basis)[np.newaxis])
    write_scaling(out, result.scaling)
    write_json(out / 'operators.json', OperatorMetadataSerializer, metadata)
    logger.info("trained artifacts written to %s", out)


def load_trained(out):
    out = Path(out)
    metadata = read_json(out / 'operators.json', OperatorMetadataSerializer)
    r, m = metadata['r'], metadata['m']
    c, A, H, B = (read_matrix(out / f'{name}.oimx') for name in OPERATOR_FILES)
    if B.size == 0:
        B = np.empty((r, m))
    operators = RomOperators(c, A, H, B)
    if operators.r != r or operators.m != m:
        raise DimensionError(f"operator files have r={operators.r}, m={operators.m}; metadata says r={r}, m={m}")
    V = read_matrix(out / 'basis.oimx')
    if V.shape[1] != r:
        raise DimensionError(f"basis has {V.shape[1]} columns, operators have r={r}")
    layout = VariableLayout.parse(metadata['variables'])
    scaling = read_scaling(out, layout, V.shape[0])
    qhat0 = read_matrix(out / 'initial_state.oimx').reshape(-1)
    return TrainedModel(operators, V, scaling, qhat0, metadata)


def save_trajectory(out, trajectory):
    out = Path(out)
    write_matrix(out / 'times.oimx', trajectory.times[np.newaxis])
    write_matrix(out / 'trajectory.oimx', trajectory.states)
    status = trajectory.status
    write_json(out / 'trajectory.json', TrajectoryStatusSerializer, {
        'status': status.kind.value,
        'time': status.time,
        'index': status.index,
        'message': status.message,
        'points': int(trajectory.times.size),
    })


def load_trajectory(out):
    out = Path(out)
    times = read_matrix(out / 'times.oimx').reshape(-1)
    states = read_matrix(out / 'trajectory.oimx')
    if states.shape[1] != times.size:
        raise DimensionError(f"trajectory has {states.shape[1]} columns for {times.size} times")
    return times, states, read_json(out / 'trajectory.json', TrajectoryStatusSerializer)

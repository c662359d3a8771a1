"""RunConfig: ``key = value`` run files validated against the OPINF defaults."""
import logging
from pathlib import Path

from .exceptions import OpInfError
from .pod import RsvdOptions
from .preprocess import TransformSpec, VariableLayout
from .regsearch import GridSpec, NelderMeadOptions, SearchConfig
from .rom_model import NoInput, SampledSignal, pressure_forcing
from .serializers import RunConfigSerializer
from .timederiv import UniformTimeGrid

logger = logging.getLogger(__name__)


class ConfigError(OpInfError):
    def __init__(self, errors):
        self.errors = errors
        details = '; '.join(
            f"{key}: {' '.join(str(message) for message in messages)}"
            for key, messages in errors.items()
        )
        super().__init__(f"invalid configuration: {details}")


def parse_config_text(text, source='<config>'):
    """Split ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        if not sep or not key.strip():
            raise ConfigError({f"line {number}": [f"expected 'key = value' in {source}"]})
        values[key.strip().lower()] = value.strip()
    return values


class RunConfig:
    def __init__(self, values=None, **overrides):
        data = dict(values or {})
        data.update({key: value for key, value in overrides.items() if value is not None})
        serializer = RunConfigSerializer(data=data)
        if not serializer.is_valid():
            raise ConfigError(serializer.errors)
        self.data = serializer.validated_data

    @classmethod
    def from_file(cls, path=None, **overrides):
        values = parse_config_text(Path(path).read_text(), str(path)) if path else {}
        return cls(values, **overrides)

    def __getattr__(self, name):
        try:
            return self.__dict__['data'][name]
        except KeyError:
            raise AttributeError(name) from None

    def layout(self):
        return VariableLayout.parse(self.variables, self.cells)

    def transform_spec(self):
        if not self.transform:
            return TransformSpec.identity(self.layout().names)
        return TransformSpec.parse(self.native_names(), self.transform, self.inverse_prefer)

    def native_names(self):
        if self.native_variables:
            return [name.strip() for name in self.native_variables.split(',') if name.strip()]
        return list(self.layout().names)

    def search_config(self):
        return SearchConfig(
            tau=self.tau,
            grid=GridSpec(
                (self.lambda1_log10_min, self.lambda1_log10_max), self.lambda1_count,
                (self.lambda2_log10_min, self.lambda2_log10_max), self.lambda2_count,
            ),
            nm=NelderMeadOptions(self.nm_simplex_scale, self.nm_max_iterations, self.nm_xatol, self.nm_fatol),
            error_norm=self.error_norm,
            rtol=self.rtol,
            atol=self.atol,
            threads=self.threads,
        )

    def rsvd(self):
        return RsvdOptions(self.rsvd_oversampling, self.rsvd_power_iterations, self.dense_svd_limit, self.seed)

    def time_grid(self, k=None):
        return UniformTimeGrid(self.t0, self.dt, k or self.k)

    def final_time(self, grid):
        return max(self.tf, grid.t_last)

    def input_signal(self, times=None, U=None):
        if self.signal == 'none':
            return NoInput()
        if self.signal == 'pressure':
            return pressure_forcing(self.signal_p_ref, self.signal_amplitude, self.signal_frequency)
        if U is None:
            return NoInput()
        return SampledSignal(times, U)

    def monitor_rows(self):
        return [int(item) for item in self.monitor.split(',') if item.strip()]

    def as_text(self):
        return '\n'.join(f"{key} = {value}" for key, value in self.data.items())

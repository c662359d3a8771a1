from django.conf import settings
from rest_framework import serializers

from .preprocess import TransformSpec, VariableLayout
from .regsearch import ERROR_NORMS


def _default(key):
    return settings.OPINF[key]


class RunConfigSerializer(serializers.Serializer):
    # variables / transform
    variables = serializers.CharField(default=_default('VARIABLES'))
    native_variables = serializers.CharField(default=_default('NATIVE_VARIABLES'), allow_blank=True)
    transform = serializers.CharField(default=_default('TRANSFORM'), allow_blank=True)
    inverse_prefer = serializers.CharField(default=_default('INVERSE_PREFER'), allow_blank=True)
    cells = serializers.IntegerField(default=_default('CELLS'), min_value=0)
    # input dimension reported by rank-report
    m = serializers.IntegerField(default=_default('M'), min_value=0)

    # basis
    r = serializers.IntegerField(default=_default('R'), min_value=0)
    energy_threshold = serializers.FloatField(default=_default('ENERGY_THRESHOLD'), min_value=0, max_value=1)
    rsvd_oversampling = serializers.IntegerField(default=_default('RSVD_OVERSAMPLING'), min_value=0)
    rsvd_power_iterations = serializers.IntegerField(default=_default('RSVD_POWER_ITERATIONS'), min_value=0)
    dense_svd_limit = serializers.IntegerField(default=_default('DENSE_SVD_LIMIT'), min_value=1)

    # time grid
    t0 = serializers.FloatField(default=_default('T0'))
    dt = serializers.FloatField(default=_default('DT'))
    k = serializers.IntegerField(default=_default('K'), min_value=0)
    tf = serializers.FloatField(default=_default('TF'))

    # regularization search
    tau = serializers.FloatField(default=_default('TAU'), min_value=1)
    lambda1_log10_min = serializers.FloatField(default=_default('LAMBDA1_LOG10_MIN'))
    lambda1_log10_max = serializers.FloatField(default=_default('LAMBDA1_LOG10_MAX'))
    lambda1_count = serializers.IntegerField(default=_default('LAMBDA1_COUNT'), min_value=2)
    lambda2_log10_min = serializers.FloatField(default=_default('LAMBDA2_LOG10_MIN'))
    lambda2_log10_max = serializers.FloatField(default=_default('LAMBDA2_LOG10_MAX'))
    lambda2_count = serializers.IntegerField(default=_default('LAMBDA2_COUNT'), min_value=2)
    nm_simplex_scale = serializers.FloatField(default=_default('NM_SIMPLEX_SCALE'))
    nm_max_iterations = serializers.IntegerField(default=_default('NM_MAX_ITERATIONS'), min_value=1)
    nm_xatol = serializers.FloatField(default=_default('NM_XATOL'), min_value=0)
    nm_fatol = serializers.FloatField(default=_default('NM_FATOL'), min_value=0)
    error_norm = serializers.ChoiceField(choices=ERROR_NORMS, default=_default('ERROR_NORM'))
    derivatives = serializers.ChoiceField(choices=('fd4', 'provided'), default=_default('DERIVATIVES'))

    # integration
    rtol = serializers.FloatField(default=_default('RTOL'))
    atol = serializers.FloatField(default=_default('ATOL'))

    # input signal
    signal = serializers.ChoiceField(choices=('none', 'sampled', 'pressure'), default=_default('SIGNAL'))
    signal_p_ref = serializers.FloatField(default=_default('SIGNAL_P_REF'))
    signal_amplitude = serializers.FloatField(default=_default('SIGNAL_AMPLITUDE'))
    signal_frequency = serializers.FloatField(default=_default('SIGNAL_FREQUENCY'))

    # evaluation
    error_floor = serializers.FloatField(default=_default('ERROR_FLOOR'), min_value=0)
    monitor = serializers.CharField(default=_default('MONITOR'), allow_blank=True)

    # synthetic Burgers dataset
    burgers_n = serializers.IntegerField(default=_default('BURGERS_N'), min_value=8)
    burgers_viscosity = serializers.FloatField(default=_default('BURGERS_VISCOSITY'))
    burgers_length = serializers.FloatField(default=_default('BURGERS_LENGTH'))
    burgers_boundary = serializers.ChoiceField(
        choices=('dirichlet', 'periodic'), default=_default('BURGERS_BOUNDARY'),
    )
    burgers_steps = serializers.IntegerField(default=_default('BURGERS_STEPS'), min_value=5)

    # run
    seed = serializers.IntegerField(default=_default('SEED'), min_value=0)
    threads = serializers.IntegerField(default=_default('THREADS'), min_value=1)
    out = serializers.CharField(default=_default('OUT'))

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: "Unknown configuration key." for key in unknown})
        return super().to_internal_value(data)

    def validate_variables(self, value):
        try:
            VariableLayout.parse(value)
        except ValueError as exc:
            raise serializers.ValidationError(str(exc))
        return value

    def validate_monitor(self, value):
        try:
            [int(item) for item in value.split(',') if item.strip()]
        except ValueError:
            raise serializers.ValidationError("Monitor locations must be comma-separated row indices.")
        return value

    def validate(self, attrs):
        if attrs['dt'] <= 0:
            raise serializers.ValidationError({'dt': "Time step must be positive."})
        if attrs['rtol'] < 0 or attrs['atol'] < 0:
            raise serializers.ValidationError({'rtol': "Integration tolerances cannot be negative."})
        if attrs['rtol'] == 0 and attrs['atol'] == 0:
            raise serializers.ValidationError({'atol': "At least one integration tolerance must be positive."})
        if attrs['energy_threshold'] >= 1:
            raise serializers.ValidationError({'energy_threshold': "Energy threshold must be below 1."})
        if attrs['lambda1_log10_min'] > attrs['lambda1_log10_max']:
            raise serializers.ValidationError({'lambda1_log10_min': "Range minimum exceeds its maximum."})
        if attrs['lambda2_log10_min'] > attrs['lambda2_log10_max']:
            raise serializers.ValidationError({'lambda2_log10_min': "Range minimum exceeds its maximum."})
        if attrs['transform'] and not attrs['native_variables']:
            raise serializers.ValidationError({'native_variables': "A transform needs the native variable names."})
        if attrs['transform']:
            try:
                TransformSpec.parse(
                    [name.strip() for name in attrs['native_variables'].split(',') if name.strip()],
                    attrs['transform'], attrs['inverse_prefer'],
                )
            except ValueError as exc:
                raise serializers.ValidationError({'transform': str(exc)})
        return attrs


class OperatorMetadataSerializer(serializers.Serializer):
    r = serializers.IntegerField()
    m = serializers.IntegerField()
    k = serializers.IntegerField()
    d = serializers.IntegerField()
    lambda1 = serializers.FloatField()
    lambda2 = serializers.FloatField()
    bound = serializers.FloatField()
    tau = serializers.FloatField()
    training_error = serializers.FloatField()
    t0 = serializers.FloatField()
    dt = serializers.FloatField()
    tf = serializers.FloatField()
    variables = serializers.CharField()
    native_variables = serializers.ListField(child=serializers.CharField())
    transform = serializers.CharField(allow_blank=True)
    inverse_prefer = serializers.CharField(allow_blank=True)


class TrajectoryStatusSerializer(serializers.Serializer):
    status = serializers.ChoiceField(choices=('completed', 'bound_violated', 'integrator_failed'))
    time = serializers.FloatField(allow_null=True)
    index = serializers.IntegerField(allow_null=True)
    message = serializers.CharField(allow_blank=True)
    points = serializers.IntegerField()

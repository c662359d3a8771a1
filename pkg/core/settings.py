from pathlib import Path

from decouple import config, Choices

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-opinf-dev-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    # Third party apps
    'rest_framework',

    # Local apps
    'rom',
]

# No database: every artifact lives in the output directory of a run.
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Logging
OPINF_LOG = config('OPINF_LOG', default='info', cast=Choices(['error', 'info', 'debug']))

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'rom': {
            'handlers': ['console'],
            'level': OPINF_LOG.upper(),
            'propagate': False,
        },
    },
}

# REST Framework Configuration: sidecar JSON must reject NaN and Infinity
REST_FRAMEWORK = {
    'STRICT_JSON': True,
}

# Operator Inference defaults. Every RunConfig key falls back to this table.
OPINF = {
    # variables / transform
    'VARIABLES': 'q:signed',
    'NATIVE_VARIABLES': '',
    'TRANSFORM': '',
    'INVERSE_PREFER': '',
    'CELLS': 0,
    'M': 1,

    # basis
    'R': 0,
    'ENERGY_THRESHOLD': 0.985,
    'RSVD_OVERSAMPLING': 10,
    'RSVD_POWER_ITERATIONS': 2,
    'DENSE_SVD_LIMIT': 512,

    # time grid
    'T0': 0.0,
    'DT': 1.0,
    'K': 0,
    'TF': 0.0,

    # regularization search
    'TAU': 1.5,
    'LAMBDA1_LOG10_MIN': 0.0,
    'LAMBDA1_LOG10_MAX': 5.0,
    'LAMBDA1_COUNT': 6,
    'LAMBDA2_LOG10_MIN': 0.0,
    'LAMBDA2_LOG10_MAX': 5.0,
    'LAMBDA2_COUNT': 6,
    'NM_SIMPLEX_SCALE': 0.5,
    'NM_MAX_ITERATIONS': 200,
    'NM_XATOL': 1e-4,
    'NM_FATOL': 1e-8,
    'ERROR_NORM': 'l2',
    'DERIVATIVES': 'fd4',

    # integration
    'RTOL': 1e-6,
    'ATOL': 1e-9,

    # input signal
    'SIGNAL': 'sampled',
    'SIGNAL_P_REF': 1e6,
    'SIGNAL_AMPLITUDE': 0.1,
    'SIGNAL_FREQUENCY': 5000.0,

    # evaluation
    'ERROR_FLOOR': 1e-10,
    'MONITOR': '',

    # synthetic Burgers dataset
    'BURGERS_N': 256,
    'BURGERS_VISCOSITY': 0.02,
    'BURGERS_LENGTH': 1.0,
    'BURGERS_BOUNDARY': 'dirichlet',
    'BURGERS_STEPS': 1000,

    # run
    'SEED': 0,
    'THREADS': 1,
    'OUT': 'opinf_out',
}

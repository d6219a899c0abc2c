"""
Django settings for the rtk project.

There is no web surface and no database: Django provides configuration,
logging and the ``rtk`` management command.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Nothing is signed or served; Django still insists on a key.
SECRET_KEY = os.environ.get("RTK_SECRET_KEY", "rtk-insecure-local-key")

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "rtk",
]

DATABASES = {}


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Engine limits

# Largest monoid close_monoid will build before raising CapExceeded.
RTK_MONOID_CAP = int(os.environ.get("RTK_CAP", 100000))

# Largest number of complete subsystems enumerate_complete will collect.
RTK_SUBSYSTEM_CAP = int(os.environ.get("RTK_SUBSYSTEM_CAP", 10000))

# Up to this many states, adjunctions and compatibility are checked on every subset.
RTK_EXHAUSTIVE_STATES = 5

# Sampled (V, Z) pairs when the adjunction is not checked exhaustively.
RTK_ADJUNCTION_SAMPLES = 10000

RTK_ORACLE_MAX_STATES = 6
RTK_ORACLE_MAX_ELEMENTS = 4096
RTK_ORACLE_MAX_POINTS = 6
RTK_ORACLE_MAX_DIM = 2

RTK_DEFAULT_SEED = int(os.environ.get("RTK_SEED", 0))


# Reports go to stdout; logs stay on stderr.

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "{levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": os.environ.get("RTK_LOG_LEVEL", "WARNING"),
    },
}

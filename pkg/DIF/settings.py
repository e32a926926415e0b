"""
Django settings for the DIF project.

The project hosts the dif_estimator application: configuration, logging,
the management-command CLI and Celery task execution for sweeps.
Every setting has a default, so no environment is required.
"""

import environ
import sentry_sdk
from sentry_sdk.integrations.celery import CeleryIntegration
from sentry_sdk.integrations.django import DjangoIntegration

root = environ.Path(__file__) - 2
log_root = root.path("logs")

env = environ.Env(
    DEBUG=(bool, False), CELERY_TASK_ALWAYS_EAGER=(bool, True)
)
environ.Env.read_env(root(".env"))

LOGLEVEL = env("LOGLEVEL", default="INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(levelname)s %(asctime)s %(name)s.%(funcName)s:%(lineno)s - %(message)s"
        }
    },
    "handlers": {
        "stdout": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
        "file": {
            "level": "DEBUG",
            "class": "logging.FileHandler",
            "filename": log_root("dif_estimator.log"),
            "formatter": "verbose",
        },
    },
    "loggers": {
        "DIF": {"handlers": ["stdout", "file"], "level": LOGLEVEL},
        "dif_estimator": {"handlers": ["stdout", "file"], "level": LOGLEVEL},
        "celery": {"handlers": ["stdout", "file"], "level": "WARNING"},
    },
}

REDIS_URL = env.str("REDIS_URL", default="redis://localhost:6379/0")

CELERY_RESULT_BACKEND = REDIS_URL
CELERYD_HIJACK_ROOT_LOGGER = False
CELERY_BROKER_URL = REDIS_URL
CELERY_ACCEPT_CONTENT = ["application/json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
# Sweeps run in-process unless a worker pool is configured.
CELERY_TASK_ALWAYS_EAGER = env("CELERY_TASK_ALWAYS_EAGER")
CELERY_TASK_EAGER_PROPAGATES = True

SECRET_KEY = env("SECRET_KEY", default="dif-estimator-local-key")
DEBUG = env("DEBUG")

ALLOWED_HOSTS = ["127.0.0.1", "localhost"]

INSTALLED_APPS = ("dif_estimator.apps.DifEstimatorConfig",)

DATABASES = {
    "default": env.db(
        "DATABASE_URL", default=f"sqlite:///{root('db.sqlite3')}"
    )
}

USE_TZ = True
TIME_ZONE = "UTC"

DIF_OUTPUT_ROOT = env.str("DIF_OUTPUT_ROOT", default=root("output"))
DIF_EXACT_SAMPLER_CAP = env.int("DIF_EXACT_SAMPLER_CAP", default=12000)

SENTRY_DSN = env.str("SENTRY_DSN", default="")

if SENTRY_DSN and not DEBUG:
    sentry_sdk.init(
        dsn=SENTRY_DSN, integrations=[DjangoIntegration(), CeleryIntegration()]
    )

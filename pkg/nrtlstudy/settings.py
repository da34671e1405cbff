"""
Django settings for the nrtlstudy project.

The project has no database and no web views. Django provides the settings
layer, logging configuration, and the management command runner used for
the batch subcommands (vle, fit, oed, mc, soed).

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from __future__ import annotations
from typing import Any
import os
import sys

from decouple import config, Choices
import markus
import sentry_sdk
from sentry_sdk.integrations.django import DjangoIntegration
from sentry_sdk.integrations.logging import ignore_logger

SECRET_KEY = config("SECRET_KEY", "nrtlstudy-batch-only", cast=str)
DEBUG = config("DEBUG", False, cast=bool)
ALLOWED_HOSTS: list[str] = []

NRTL_STUDY_CHANNEL = config("NRTL_STUDY_CHANNEL", default="local")

# Application definition
INSTALLED_APPS = [
    "nrtlstudy.apps.NrtlStudyConfig",
    "thermo.apps.ThermoConfig",
    "estimation.apps.EstimationConfig",
    "montecarlo.apps.MonteCarloConfig",
]

# Batch-only project, no database access
DATABASES: dict[str, dict[str, Any]] = {}
USE_TZ = True
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Settings for the batch commands
NRTL_STUDY_THREADS = config("NRTL_STUDY_THREADS", 1, cast=int)
NRTL_STUDY_OUTPUT_DIR = config(
    "NRTL_STUDY_OUTPUT_DIR", os.path.join(os.curdir, "out")
)
NRTL_STUDY_VERBOSITY = config(
    "NRTL_STUDY_VERBOSITY", 1, cast=Choices(range(0, 4), cast=int)
)
NRTL_STUDY_FAILURE_ALARM = config("NRTL_STUDY_FAILURE_ALARM", 0.1, cast=float)

DJANGO_STATSD_ENABLED = config("DJANGO_STATSD_ENABLED", False, cast=bool)
STATSD_DEBUG = config("STATSD_DEBUG", False, cast=bool)
STATSD_ENABLED = DJANGO_STATSD_ENABLED or STATSD_DEBUG
STATSD_HOST = config("DJANGO_STATSD_HOST", "127.0.0.1")
STATSD_PORT = config("DJANGO_STATSD_PORT", "8125")
STATSD_PREFIX = config("DJANGO_STATSD_PREFIX", "nrtl.study")

LOGGING = {
    "version": 1,
    "formatters": {
        "json": {
            "()": "dockerflow.logging.JsonLogFormatter",
            "logger_name": "nrtl-study",
        }
    },
    "handlers": {
        "console_out": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "stream": sys.stdout,
            "formatter": "json",
        },
        "console_err": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "json",
        },
    },
    "loggers": {
        "events": {
            "handlers": ["console_err"],
            "level": "ERROR",
        },
        "eventsinfo": {
            "handlers": ["console_out"],
            "level": "INFO",
        },
        "markus": {"handlers": ["console_out"], "level": "DEBUG"},
    },
}

SENTRY_DEBUG = config("SENTRY_DEBUG", DEBUG, cast=bool)
SENTRY_ENVIRONMENT = config("SENTRY_ENVIRONMENT", NRTL_STUDY_CHANNEL)
sentry_sdk.init(
    dsn=config("SENTRY_DSN", None),
    integrations=[DjangoIntegration()],
    debug=SENTRY_DEBUG,
    include_local_variables=DEBUG,
    environment=SENTRY_ENVIRONMENT,
)
# Per-replicate diagnostics are expected noise in Monte Carlo runs
ignore_logger("eventsinfo.montecarlo")

_MARKUS_BACKENDS: list[dict[str, Any]] = []
if DJANGO_STATSD_ENABLED:
    _MARKUS_BACKENDS.append(
        {
            "class": "markus.backends.datadog.DatadogMetrics",
            "options": {
                "statsd_host": STATSD_HOST,
                "statsd_port": STATSD_PORT,
                "statsd_prefix": STATSD_PREFIX,
            },
        }
    )
if STATSD_DEBUG:
    _MARKUS_BACKENDS.append(
        {
            "class": "markus.backends.logging.LoggingMetrics",
            "options": {
                "logger_name": "markus",
                "leader": "METRICS",
            },
        }
    )
markus.configure(backends=_MARKUS_BACKENDS)

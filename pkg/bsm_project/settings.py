"""
Django settings for bsm_project project.

The project has no web surface: Django provides the management-command
entry point, form validation for run configurations and the ORM behind the
run registry.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
from decouple import config
import dj_database_url

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Only used by Django internals (signing); nothing in the simulator depends on it.
SECRET_KEY = config('SECRET_KEY', default='bellsim-local-only-not-a-secret')

DEBUG = config('DEBUG', default=False, cast=bool)

# Application definition

INSTALLED_APPS = [
    'bellsim',  # Bell state measurement simulator
]


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

# The run registry uses DATABASE_URL when set (e.g. PostgreSQL)
# Falls back to SQLite for local runs if DATABASE_URL not set
DATABASE_URL = config('DATABASE_URL', default=f'sqlite:///{BASE_DIR / "db.sqlite3"}')
DATABASES = {
    'default': dj_database_url.parse(
        DATABASE_URL,
        conn_max_age=600,
        conn_health_checks=True,
    )
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Output locations
# Environment variables may move outputs around, never change physics.
BELLSIM_OUTPUT_DIR = config('BELLSIM_OUTPUT_DIR', default='')
BELLSIM_MANIFEST_SUFFIX = config('BELLSIM_MANIFEST_SUFFIX', default='.manifest.json')


# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s [%(levelname)s] [%(name)s] %(message)s',
            'datefmt': '%Y-%m-%d %H:%M:%S',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'bellsim': {
            'handlers': ['console'],
            'level': config('BELLSIM_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
    },
}

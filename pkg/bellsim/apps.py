from django.apps import AppConfig


class BellsimConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'bellsim'
    verbose_name = 'Bell state measurement simulator'

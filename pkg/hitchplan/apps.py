from django.apps import AppConfig


class HitchplanConfig(AppConfig):
    name = 'hitchplan'
    verbose_name = 'Trailer motion planning'

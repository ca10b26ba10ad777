from django.apps import AppConfig


class PropagateConfig(AppConfig):
    name = 'propagate'

from django.apps import AppConfig


class PulseshapeConfig(AppConfig):
    name = 'pulseshape'

from django.apps import AppConfig


class BathframeConfig(AppConfig):
    name = 'bathframe'

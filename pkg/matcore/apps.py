from django.apps import AppConfig


class MatcoreConfig(AppConfig):
    name = 'matcore'

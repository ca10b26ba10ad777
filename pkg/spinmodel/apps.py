from django.apps import AppConfig


class SpinmodelConfig(AppConfig):
    name = 'spinmodel'

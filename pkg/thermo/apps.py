from django.apps import AppConfig


class ThermoConfig(AppConfig):
    name = "thermo"

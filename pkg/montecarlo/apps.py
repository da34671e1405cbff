from django.apps import AppConfig


class MonteCarloConfig(AppConfig):
    name = "montecarlo"
    verbose_name = "Monte Carlo harnesses"

from django.apps import AppConfig


class NrtlStudyConfig(AppConfig):
    name = "nrtlstudy"
    verbose_name = "NRTL identifiability study"

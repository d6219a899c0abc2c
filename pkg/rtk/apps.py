from django.apps import AppConfig


class RtkConfig(AppConfig):
    name = "rtk"
    verbose_name = "Finite resource theory toolkit"

from django.apps import AppConfig


class RomConfig(AppConfig):
    name = 'rom'
    verbose_name = 'Operator Inference reduced-order models'

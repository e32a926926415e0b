from django.apps import AppConfig


class DifEstimatorConfig(AppConfig):
    name = "dif_estimator"
    verbose_name = "Deformed isotropic field estimator"

from __future__ import absolute_import

import logging

from celery import shared_task

from dif_estimator.sweep import sweep_row_from_data

logger = logging.getLogger(__name__)


@shared_task
def sweep_row(config_data, n):
    """
    One convergence-sweep row as a task.

    :param config_data: the experiment configuration as a plain dict
    :param n: grid density of the row
    :return: the row as a dict of JSON-serializable values
    """
    logger.info(f"Running sweep row n={n}")
    return sweep_row_from_data(config_data, n)

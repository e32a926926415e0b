import logging
import time
from functools import wraps

from dif_estimator.exceptions import DeformedFieldException, StageError

logger = logging.getLogger(__name__)


def pipeline_stage(name):
    """
    Marks a function as a named stage of the estimation pipeline.

    Library errors raised inside the stage are re-raised as StageError
    carrying the stage name, so the CLI can report where the run failed.
    Errors that are already stage errors pass through untouched.

    :param name: stage name reported on failure
    """

    def decorator(f):
        @wraps(f)
        def wrapper(*args, **kwargs):
            started = time.perf_counter()
            logger.debug(f"Entering stage {name}")
            try:
                result = f(*args, **kwargs)
            except StageError:
                raise
            except DeformedFieldException as e:
                logger.warning(f"Stage {name} failed: {e}")
                raise StageError(name, e) from e
            elapsed = time.perf_counter() - started
            logger.info(f"Stage {name} finished in {elapsed:.2f}s")
            return result

        return wrapper

    return decorator

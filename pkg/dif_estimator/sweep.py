"""
Convergence sweeps: the pipeline rerun over increasing grid densities on
one fixed compact evaluation set, one CSV row per density.
"""
import csv
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from celery import group

from dif_estimator import constants
from dif_estimator.alignment import aligned_error
from dif_estimator.config import config_from_dict
from dif_estimator.constants import RunMode
from dif_estimator.dilatation import estimate_dilatation_field
from dif_estimator.exceptions import DeformedFieldException, StageError
from dif_estimator.qvar import g_true, smoothed_variation_field
from dif_estimator.reconstruct import reconstruct_f
from dif_estimator.simulate import sample_field
from dif_estimator.utils import derive_seed, format_float

logger = logging.getLogger(__name__)

COLUMNS = (
    "n",
    "b",
    "seed",
    "sup_B_error",
    "sup_g",
    "sup_mu_error",
    "sup_tau_error",
    "aligned_sup_error",
    "aligned_rms_error",
    "wall_time",
    "error",
)


@dataclass
class SweepTable:
    theta: tuple
    rows: list = field(default_factory=list)
    headers: dict = field(default_factory=dict)

    def column(self, name):
        return [row.get(name) for row in self.rows]

    def to_csv(self):
        buffer = io.StringIO()
        for name, value in self.headers.items():
            buffer.write(f"# {name}={value}\n")
        buffer.write(
            "# theta=" + " ".join(format_float(v) for v in self.theta) + "\n"
        )
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_csv_value(row.get(name)) for name in COLUMNS])
        return buffer.getvalue()


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format_float(value)
    return value


def row_seed(master_seed, n):
    """Seed of the sweep row at density n: the master seed split at key n."""
    return derive_seed(master_seed, n)


def evaluation_set(config, model=None):
    """
    Theta: the domain shrunk by b_max * R_K + 2 / n_min on every side, with
    b_max the bandwidth at the smallest density of the sweep.
    """
    n_min = min(config.sweep.n_values)
    b_max = config.bandwidth_for(n_min, model)
    shrink = b_max * config.kernel().truncation_radius + 2.0 / n_min
    x0, y0, x1, y1 = config.grid.domain
    return (x0 + shrink, y0 + shrink, x1 - shrink, y1 - shrink)


def _inside(xs, ys, theta):
    x0, y0, x1, y1 = theta
    tol = constants.GRID_TOLERANCE
    columns = (xs >= x0 - tol) & (xs <= x1 + tol)
    rows = (ys >= y0 - tol) & (ys <= y1 + tol)
    return rows[:, np.newaxis] & columns[np.newaxis, :]


def variation_errors(Y, b, kernel, model, deformation, theta):
    """(sup over Theta of |B - g|, sup over Theta of g), all directions."""
    variations = smoothed_variation_field(Y, b, kernel, model.alpha, region=theta)
    points = variations.xs[np.newaxis, :] + 1j * variations.ys[:, np.newaxis]
    inside = _inside(variations.xs, variations.ys, theta)
    error, scale = 0.0, 0.0
    for name, values in variations.values.items():
        target = model.sigma_c * g_true(deformation, points, name, model.alpha)
        error = max(error, float(np.max(np.abs(values - target)[inside])))
        scale = max(scale, float(np.max(target[inside])))
    return error, scale


def dilatation_errors(Y, b, kernel, model, deformation, theta, clamp):
    estimate = estimate_dilatation_field(Y, theta, b, kernel, model.alpha, clamp)
    inside = _inside(estimate.xs, estimate.ys, theta)
    points = estimate.points
    mu_error = np.abs(estimate.mu - deformation.mu(points))[inside]
    tau_error = np.abs(estimate.tau - deformation.tau(points))[inside]
    return float(mu_error.max()), float(tau_error.max())


def run_sweep_row(config, n):
    """One row of the sweep table; stage failures are recorded, not raised."""
    started = time.perf_counter()
    model = config.covariance()
    deformation = config.deformation_map()
    kernel = config.kernel()
    b = config.bandwidth_for(n, model)
    seed = row_seed(config.sweep.seed, n)
    theta = evaluation_set(config, model)
    row = {"n": n, "b": b, "seed": seed}
    try:
        Y = sample_field(
            model,
            deformation,
            config.grid_spec(n),
            seed,
            sampler=config.grid.sampler,
            oversample=config.grid.oversample,
        )
        row["sup_B_error"], row["sup_g"] = variation_errors(
            Y, b, kernel, model, deformation, theta
        )
        if config.mode is not RunMode.VARIATION:
            row["sup_mu_error"], row["sup_tau_error"] = dilatation_errors(
                Y, b, kernel, model, deformation, theta, config.solver.mu_clamp
            )
        if config.mode is RunMode.RECONSTRUCTION:
            reconstructed = reconstruct_f(Y, config, deformation)
            alignment = aligned_error(
                deformation, reconstructed, config.solver.metric_fraction
            )
            row["aligned_sup_error"] = alignment.sup_error
            row["aligned_rms_error"] = alignment.rms_error
    except StageError as e:
        logger.warning(f"Sweep row n={n} failed in stage {e.stage}: {e.cause}")
        row["error"] = f"{e.stage}: {e.cause}"
    except DeformedFieldException as e:
        logger.warning(f"Sweep row n={n} failed: {e}")
        row["error"] = f"{type(e).__name__}: {e}"
    row["wall_time"] = time.perf_counter() - started
    logger.info(f"Sweep row n={n} done in {row['wall_time']:.1f}s")
    return row


def convergence_sweep(config):
    """
    Runs every density of ``config.sweep.n_values`` as a Celery task group;
    rows come back in sweep order whatever the execution order.
    """
    from dif_estimator.tasks import sweep_row

    n_values = list(config.sweep.n_values)
    data = config.to_dict()
    result = group(sweep_row.s(data, n) for n in n_values).apply_async()
    # per-result get keeps eager runs off the result backend
    rows = sorted(
        (r.get(disable_sync_subtasks=False) for r in result.results),
        key=lambda row: row["n"],
    )
    return SweepTable(
        theta=evaluation_set(config),
        rows=rows,
        headers={
            "master_seed": config.sweep.seed,
            "row_seed": "derive_seed(master_seed, n)",
            "mode": config.mode.value,
            "deformation": config.deformation.kind,
        },
    )


def sweep_row_from_data(data, n):
    return run_sweep_row(config_from_dict(data), n)

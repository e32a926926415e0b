from dataclasses import replace

from django.test import SimpleTestCase

from dif_estimator.config import (
    BandwidthConfig,
    DeformationConfig,
    ExperimentConfig,
    GridConfig,
    SweepConfig,
)
from dif_estimator.sweep import (
    COLUMNS,
    convergence_sweep,
    evaluation_set,
    row_seed,
    run_sweep_row,
)
from dif_estimator.tasks import sweep_row


def create_variation_config(**grid):
    settings = dict(n=24, sampler="exact-cholesky")
    settings.update(grid)
    return ExperimentConfig(
        deformation=DeformationConfig(kind="affine", matrix=((2.0, 0.0), (0.0, 1.0))),
        grid=GridConfig(**settings),
        bandwidth=BandwidthConfig(mode="variation"),
        sweep=SweepConfig(n_values=(16, 24)),
    )


def without_wall_time(csv_text):
    index = COLUMNS.index("wall_time")
    lines = []
    for line in csv_text.splitlines():
        if line.startswith("#"):
            lines.append(line)
            continue
        cells = line.split(",")
        lines.append(",".join(cells[:index] + cells[index + 1 :]))
    return lines


class TestSweepHelpers(SimpleTestCase):
    def test_row_seeds_are_stable_and_distinct(self):
        self.assertEqual(row_seed(20240917, 64), row_seed(20240917, 64))
        self.assertNotEqual(row_seed(20240917, 64), row_seed(20240917, 96))
        self.assertNotEqual(row_seed(20240917, 64), row_seed(20240918, 64))

    def test_evaluation_set_shrinks_by_the_largest_window(self):
        config = ExperimentConfig()
        shrink = config.bandwidth_for(64) + 2 / 64

        theta = evaluation_set(config)

        for value, expected in zip(theta, (shrink, shrink, 1 - shrink, 1 - shrink)):
            self.assertAlmostEqual(value, expected)

    def test_failed_row_records_the_error(self):
        config = create_variation_config(sampler="circulant-interp", oversample=1)

        row = run_sweep_row(config, 16)

        self.assertTrue(row["error"].startswith("SamplerPreconditionError"))
        self.assertNotIn("sup_B_error", row)
        self.assertEqual(row["seed"], row_seed(config.sweep.seed, 16))


class TestConvergenceSweep(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.config = create_variation_config()
        cls.table = convergence_sweep(cls.config)

    def test_one_row_per_density_in_sweep_order(self):
        self.assertEqual(self.table.column("n"), [16, 24])
        for row in self.table.rows:
            self.assertNotIn("error", row)
            self.assertGreater(row["sup_g"], 0)
            self.assertIsNone(row.get("aligned_sup_error"))

    def test_csv_layout(self):
        lines = self.table.to_csv().splitlines()

        self.assertEqual(lines[0], f"# master_seed={self.config.sweep.seed}")
        self.assertTrue(lines[4].startswith("# theta="))
        self.assertEqual(lines[5], ",".join(COLUMNS))
        self.assertEqual(len(lines), 8)

    def test_identical_configs_give_identical_tables(self):
        again = convergence_sweep(replace(self.config))

        self.assertEqual(without_wall_time(again.to_csv()), without_wall_time(self.table.to_csv()))

    def test_task_returns_the_row(self):
        row = sweep_row.delay(self.config.to_dict(), 16).get()

        self.assertEqual(row["sup_B_error"], self.table.rows[0]["sup_B_error"])

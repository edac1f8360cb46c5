"""End-to-end check: converter output loads cleanly through the data layer."""

import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from dwafm.data import load_data_file, load_dataset_dir

CONVERTER_CLI = Path(__file__).resolve().parents[1] / "converter" / "dist" / "cli.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not CONVERTER_CLI.exists(),
    reason="converter not built (run npm install && npm run build in converter/)",
)


def test_converted_dataset_loads_and_matches(tmp_path):
    rng = np.random.default_rng(7)
    length, n_nodes, channels = 120, 4, 3
    raw = rng.normal(50.0, 10.0, size=(length, n_nodes, channels))
    np.savez(tmp_path / "data.npz", data=raw)
    lines = ["from,to,cost"] + [f"{i},{i + 1},{(i + 1) * 2.0}" for i in range(n_nodes - 1)]
    (tmp_path / "distances.csv").write_text("\n".join(lines) + "\n")

    out_dir = tmp_path / "converted"
    proc = subprocess.run(
        [
            "node",
            str(CONVERTER_CLI),
            "convert",
            str(tmp_path / "data.npz"),
            str(tmp_path / "distances.csv"),
            "--rate",
            "5",
            "--start",
            "2016-07-01T00:00:00",
            "-o",
            str(out_dir),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr

    verify = subprocess.run(
        ["node", str(CONVERTER_CLI), "verify", str(out_dir)],
        capture_output=True,
        text=True,
    )
    assert verify.returncode == 0, verify.stderr

    series = load_data_file(out_dir / "data.dwaf")
    assert series.values.shape == (length, n_nodes, 1)
    # converter keeps only the first channel, rounded to float32
    np.testing.assert_array_equal(
        series.values[:, :, 0], raw[:, :, 0].astype(np.float32)
    )
    assert series.sample_rate == 5
    assert series.start_timestamp == "2016-07-01T00:00:00"

    dataset = load_dataset_dir(out_dir, t_in=6, t_out=6)
    assert dataset.sample_rate == 5

    # chain graph plus self-loops, symmetric support
    mask = dataset.graph.mask
    assert mask.shape == (n_nodes, n_nodes)
    assert np.all(np.diag(mask))
    assert np.array_equal(mask, mask.T)
    assert mask[0, 1] and not mask[0, 2]

    # windows exist in every split and carry the expected shapes
    for split in (dataset.train, dataset.val, dataset.test):
        assert len(split) > 0
        assert split[0].x.shape == (6, n_nodes, 1)
        assert split[0].y.shape == (6, n_nodes)

"""
Driving the experiments from the command line
=============================================

The ``fracipp`` command wraps the same functions. This script runs it
in-process on a temporary directory: generate noisy data, reconstruct, and
replay the reconstruction from its manifest.
"""

import json
import tempfile
from pathlib import Path

from fracipp.cli import cli_main

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "run.cfg").write_text("alpha = 0.5\npotential = rho2\nN = 128\nM = 32\n")

    cli_main(["gendata", "--config", str(tmp / "run.cfg"), "--delta-percent", "0.5", "--seeds", "7",
              "--output", str(tmp / "data.txt")])
    print("".join((tmp / "data.txt").read_text().splitlines(keepends=True)[:10]))

    cli_main(["reconstruct", "--config", str(tmp / "run.cfg"), "--measurement", str(tmp / "data.txt"),
              "--output", str(tmp / "rho.csv")])
    manifest = json.loads((tmp / "rho.csv.manifest.json").read_text())
    print("manifest parameters:", {k: manifest["parameters"][k] for k in ("alpha", "potential", "N", "M")})

    cli_main(["reconstruct", "--manifest", str(tmp / "rho.csv.manifest.json"), "--output", str(tmp / "again.csv")])
    print("replay identical:", (tmp / "rho.csv").read_bytes() == (tmp / "again.csv").read_bytes())

    code = cli_main(["sweep", "--output", str(tmp / "s.csv")])
    print("sweep without a kind exits with", code)

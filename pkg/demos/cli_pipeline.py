"""
The command-line pipeline end to end
====================================

gen -> front -> solve -> report, driven from Python through ``cli.main``.
The same steps work from a shell with the ``anytime-moco`` command.
"""

import csv
import tempfile
from pathlib import Path

from anytime_moco.cli import main

out = Path(tempfile.mkdtemp(prefix="anytime-moco-"))
main(["gen", "--class", "KP", "--p", "2", "--n", "12", "--count", "3", "--out", str(out / "inst")])
instances = sorted(str(p) for p in (out / "inst").glob("*.json"))
main(["front", *instances, "--method", "both", "--out", str(out / "fronts")])
main(
    ["solve", *instances, "--algorithm", "tpa", "--algorithm", "fullsplit",
     "--budget-iters", "12", "--deterministic", "--out", str(out / "traces")]
)
main(["report", "--traces", str(out / "traces"), "--fronts", str(out / "fronts"),
      "--cuts", "2,4,8,12", "--out", str(out / "report")])

with open(out / "report" / "ranks.csv") as fh:
    for row in csv.DictReader(fh):
        if row["metric"] == "hvr":
            print(row["algorithm"], "cut", row["cut_ms"], "mean HVR rank", row["mean_rank"] or "-")
print("outputs in", out)

"""
Running an experiment from a config file
========================================

The same analyses are available from the ``fiberscope`` command.  This script
drives it through the library entry point and reads back the CSV output.
"""

import csv
import tempfile
from pathlib import Path

from fiberscope import parse_config, render_config, run

text = (Path(__file__).resolve().parent.parent / "configs" / "negative.cfg").read_text()
cfg = parse_config(text)
print(render_config(cfg))

with tempfile.TemporaryDirectory() as tmp:
    report, code = run(cfg, "report", tmp)
    print("exit code:", code)
    print("verdicts :", report["verdicts"])
    with open(Path(tmp) / "dimension_by_residue.csv") as fh:
        rows = list(csv.reader(fh))
    for row in rows[:4]:
        print(",".join(row))

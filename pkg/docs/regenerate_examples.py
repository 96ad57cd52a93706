"""Regenerate the example reports in docs/examples/ (one file per CLI command).

Input CSVs are rebuilt from the deterministic simulators into docs/examples/data/.
"""

from __future__ import annotations

import contextlib
import io
import os
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent / "tests"))

from cli_cases import cases, make_inputs  # noqa: E402
from hackint.cli import main  # noqa: E402


def regenerate(out_dir: Path = HERE / "examples") -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    # relative input paths keep the reports (and their config hashes) location independent
    os.chdir(out_dir)
    paths = make_inputs(Path("data"))
    for scratch in ("sim.json", "svm.json"):
        (Path("data") / scratch).unlink(missing_ok=True)
    written = []
    for name, argv in cases(paths):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(argv)
        if code != 0:
            raise SystemExit(f"{name} exited with {code}")
        target = out_dir / f"{name}.{'csv' if '--format' in argv else 'json'}"
        target.write_text(buf.getvalue(), encoding="utf-8")
        written.append(target)
    return written


if __name__ == "__main__":
    for p in regenerate():
        print(p.relative_to(HERE))

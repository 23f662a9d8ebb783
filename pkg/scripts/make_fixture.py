"""Regenerate the packaged sample dataset (src/warden/fixtures/).

The output is deterministic; run this only when the generator in
warden.fixtures changes, then commit the refreshed CSV.
"""

from __future__ import annotations

from pathlib import Path

from warden.fixtures import FIXTURE_FILENAME, generate_fixture_records
from warden.records import CSV_HEADER

OUT = Path(__file__).resolve().parents[1] / "src" / "warden" / "fixtures" / FIXTURE_FILENAME


def main() -> None:
    rows = generate_fixture_records()
    text = CSV_HEADER + "\n" + "\n".join(r.csv_line() for r in rows) + "\n"
    OUT.write_text(text, encoding="utf-8")
    positives = sum(r.purchased for r in rows)
    print(f"wrote {len(rows)} rows ({positives} purchased) to {OUT}")


if __name__ == "__main__":
    main()

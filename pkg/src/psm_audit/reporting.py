"""Deterministic report writing for the CLI.

Report bodies are canonical JSON (sorted keys, fixed separators, trailing
newline) so identical configs produce byte-identical files. Timestamps live
in a sidecar next to the report, never in the body.
"""

from __future__ import annotations

import csv
import json
import sys
import time


def canonical_json(body: dict) -> str:
    return json.dumps(body, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True) + "\n"


def write_report(body: dict, out_path=None) -> None:
    text = canonical_json(body)
    if out_path is None:
        sys.stdout.write(text)
        return
    with open(out_path, "w", encoding="ascii") as fh:
        fh.write(text)
    sidecar = str(out_path) + ".meta.json"
    with open(sidecar, "w", encoding="ascii") as fh:
        json.dump({"created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())},
                  fh)
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

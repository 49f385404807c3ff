"""Validates every subcommand's JSON output against schemas/<subcommand>.schema.json."""

import json
import subprocess
import sys
from pathlib import Path

from jsonschema import Draft202012Validator

CASES = [
    (["strata-min", "--n", "3", "--genus", "2"], 0),
    (["strata-min", "--n-max", "4", "--g-max", "3"], 0),
    (["strata-enum", "--n", "3", "--genus", "2", "--max-codim", "8"], 0),
    (["strata-enum", "--n", "2", "--genus", "0", "--max-codim", "4"], 0),
    (["kgroups", "--surface", "klein", "--degree", "2"], 0),
    (["kgroups", "--surface", "genus3", "--max-degree", "7"], 0),
    (["kgroups", "--surface", "M2#RP2", "--max-degree", "3"], 0),
    (["moduli", "--surface", "klein", "--max-degree", "4"], 0),
    (["moduli", "--surface", "genus2", "--max-degree", "4"], 0),
    (["bott-les", "--surface", "torus"], 0),
    (["bott-les", "--surface", "crosscaps5"], 0),
    (["excision", "--g1", "2", "--g2", "3"], 0),
    (["flow", "--surface", "genus2", "--n", "2", "--seed", "5", "--quiet"], 0),
    (["flow", "--surface", "klein", "--n", "3", "--seed", "1", "--max-iter", "2", "--quiet"], 3),
    (["sample", "--surface", "klein", "--n", "2", "--seed", "3", "--quiet"], 0),
    (["sample", "--surface", "torus", "--n", "2", "--count", "3", "--full", "--quiet"], 0),
    (["connect", "--surface", "genus2", "--n", "2", "--seed", "1", "--seed1", "2", "--waypoints", "9", "--quiet"], 0),
    (["connect", "--surface", "klein", "--n", "1", "--seed", "0", "--seed1", "2", "--waypoints", "5", "--full", "--quiet"], 0),
    (["obstruction", "--surface", "klein", "--n", "2", "--seed", "4", "--quiet"], 0),
    (["holonomy-roundtrip", "--surface", "genus2", "--n", "2", "--seed", "11", "--level", "2", "--quiet"], 0),
    (["fingerprint", "--surface", "crosscaps3", "--n", "2", "--seed", "6", "--quiet"], 0),
]


def records(text):
    text = text.strip()
    try:
        return [json.loads(text)]
    except json.JSONDecodeError:
        return [json.loads(line) for line in text.splitlines() if line.strip()]


def main():
    exe, schema_dir = sys.argv[1], Path(sys.argv[2])
    failures = 0
    covered = set()
    for args, expected_code in CASES:
        sub = args[0]
        covered.add(sub)
        schema = json.loads((schema_dir / f"{sub}.schema.json").read_text())
        Draft202012Validator.check_schema(schema)
        validator = Draft202012Validator(schema)
        proc = subprocess.run([exe, *args], capture_output=True, text=True)
        if proc.returncode != expected_code:
            print(f"FAIL {' '.join(args)}: exit {proc.returncode}, expected {expected_code}\n{proc.stderr}")
            failures += 1
            continue
        recs = records(proc.stdout)
        errors = [e for r in recs for e in validator.iter_errors(r)]
        for e in errors[:5]:
            print(f"FAIL {' '.join(args)}: {e.json_path}: {e.message}")
        failures += bool(errors)
        if not errors:
            print(f"ok   {' '.join(args)} ({len(recs)} record{'s' if len(recs) != 1 else ''})")
    missing = {p.name.removesuffix(".schema.json") for p in schema_dir.glob("*.schema.json")} - covered
    if missing:
        print(f"FAIL schemas without a case: {sorted(missing)}")
        failures += 1
    if len(covered) != 12:
        print(f"FAIL expected 12 subcommands, covered {len(covered)}")
        failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

"""Validates every report.json under the given directories against the report schema."""
import json
import pathlib
import sys

import jsonschema


def main() -> int:
    schema = json.loads(pathlib.Path(sys.argv[1]).read_text())
    validator = jsonschema.Draft7Validator(schema)
    reports = [p for d in sys.argv[2:] for p in pathlib.Path(d).rglob("report.json")]
    if not reports:
        print("no reports found")
        return 1
    bad = 0
    for path in sorted(reports):
        errors = sorted(validator.iter_errors(json.loads(path.read_text())), key=lambda e: list(e.path))
        for e in errors:
            print(f"{path}: {'/'.join(map(str, e.path))}: {e.message}")
        bad += bool(errors)
    print(f"{len(reports) - bad}/{len(reports)} reports valid")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())

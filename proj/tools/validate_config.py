"""Validate run configurations against the JSON schemas in docs/schema."""
import argparse
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("schema", help="schema file name, e.g. bench.schema.json")
    ap.add_argument("configs", nargs="+", type=pathlib.Path)
    ap.add_argument("--schema-dir", type=pathlib.Path,
                    default=pathlib.Path(__file__).resolve().parent.parent / "docs" / "schema")
    args = ap.parse_args()

    registry = load_registry(args.schema_dir)
    schema = json.loads((args.schema_dir / args.schema).read_text())
    validator = jsonschema.Draft202012Validator(schema, registry=registry)
    failed = False
    for cfg in args.configs:
        errors = sorted(validator.iter_errors(json.loads(cfg.read_text())), key=lambda e: list(e.path))
        for e in errors:
            print(f"{cfg}: {'/'.join(map(str, e.path)) or '<root>'}: {e.message}")
        failed |= bool(errors)
        if not errors:
            print(f"{cfg}: ok")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Rewrites templates/manifest.json with the SHA-256 of every template file."""
import hashlib
import json
import pathlib
import sys

KEYS = [
    "zero_shot",
    "zero_shot_cot",
    "few_shot",
    "rag_few_shot",
    "cg_cot",
    "judge_binary",
    "judge_five_point_normalized",
]


def main() -> int:
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent.parent / "templates")
    templates = {}
    for key in KEYS:
        name = f"{key}.txt"
        digest = hashlib.sha256((root / name).read_bytes()).hexdigest()
        templates[key] = {"file": name, "version": digest}
    (root / "manifest.json").write_text(json.dumps({"templates": templates}, indent=2) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

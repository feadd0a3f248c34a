"""Canonical JSON used for every artifact the pipeline writes.

Keys are sorted, floats are rounded to 9 significant digits, and output is
ASCII with a trailing newline, so identical data always serializes to
identical bytes.
"""

import json


def _canonical(value):
    if isinstance(value, float):
        return float(format(value, ".9g"))
    if isinstance(value, dict):
        return {k: _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    return value


def dumps(obj):
    return json.dumps(_canonical(obj), sort_keys=True, indent=2,
                      ensure_ascii=True, allow_nan=False) + "\n"


def write(obj, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(obj))


def read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)

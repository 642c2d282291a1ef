"""Writer for the sts-select embedding-store wire format.

UTF-8 JSON Lines: a header record {"format": "sts-embed", "version": 1,
"dim": D, "provenance": str}, then one {"name": str, "vector": [D floats]}
record per name. This module implements the file format contract directly;
the consumer side lives in the selection toolkit and its
``validate-embeddings`` command.
"""
from __future__ import annotations

import json

STORE_FORMAT = "sts-embed"
STORE_VERSION = 1


def write_store(path, dim: int, records, provenance: str = "") -> int:
    """Write (name, vector) records; returns the number of records written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "format": STORE_FORMAT,
            "version": STORE_VERSION,
            "dim": int(dim),
            "provenance": provenance,
        }
        fh.write(json.dumps(header) + "\n")
        for name, vector in records:
            fh.write(json.dumps({"name": name, "vector": [float(x) for x in vector]}) + "\n")
            count += 1
    return count

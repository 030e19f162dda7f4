#!/usr/bin/env python3
"""Download the published AudioSet ontology and evaluation class index.

The acceptance suite's graph-fact check (maximum class distance of 21)
runs against these two files; it is skipped when they are absent.  Files
land in data/audioset/ by default (override with AUDIOSET_DATA_DIR).
"""

import os
import pathlib
import sys
import urllib.request

ONTOLOGY_URL = "https://raw.githubusercontent.com/audioset/ontology/master/ontology.json"
CLASS_INDEX_URL = (
    "http://storage.googleapis.com/us_audioset/youtube_corpus/v1/csv/class_labels_indices.csv"
)


def main() -> int:
    target = pathlib.Path(
        os.environ.get("AUDIOSET_DATA_DIR", pathlib.Path(__file__).resolve().parent.parent / "data" / "audioset")
    )
    target.mkdir(parents=True, exist_ok=True)
    for url, name in ((ONTOLOGY_URL, "ontology.json"), (CLASS_INDEX_URL, "class_labels_indices.csv")):
        dest = target / name
        if dest.exists():
            print(f"already present: {dest}")
            continue
        print(f"fetching {url}")
        with urllib.request.urlopen(url, timeout=60) as resp:
            dest.write_bytes(resp.read())
        print(f"wrote {dest} ({dest.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Download the WN18RR and FB15K-237 benchmark splits (networked environments only).

Files land under DATA_DIR (default ./data), one directory per dataset with
train.txt / valid.txt / test.txt in tab-separated head<TAB>relation<TAB>tail
form, which is what `tripletune stats --graph data/WN18RR/*.txt` expects.
Set TRIPLETUNE_DATA_DIR to point the test suite at the download location.
"""

import hashlib
import os
import sys
import urllib.request
from pathlib import Path

BASE = "https://raw.githubusercontent.com/villmow/datasets_knowledge_embedding/master"

DATASETS = {
    "WN18RR": [f"{BASE}/WN18RR/text/{s}.txt" for s in ("train", "valid", "test")],
    "FB15K-237": [f"{BASE}/FB15k-237/{s}.txt" for s in ("train", "valid", "test")],
}


def fetch(url: str, dest: Path) -> None:
    if dest.exists():
        print(f"  {dest} already present, skipping")
        return
    print(f"  {url} -> {dest}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        data = resp.read()
    dest.write_bytes(data)
    print(f"    sha256 {hashlib.sha256(data).hexdigest()} ({len(data)} bytes)")


def main() -> int:
    root = Path(os.environ.get("TRIPLETUNE_DATA_DIR",
                               sys.argv[1] if len(sys.argv) > 1 else "data"))
    for name, urls in DATASETS.items():
        out = root / name
        out.mkdir(parents=True, exist_ok=True)
        print(f"{name}:")
        for url in urls:
            fetch(url, out / url.rsplit("/", 1)[-1])
    print(f"done; set TRIPLETUNE_DATA_DIR={root} to enable the dataset-gated tests")
    return 0


if __name__ == "__main__":
    sys.exit(main())

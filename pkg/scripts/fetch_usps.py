#!/usr/bin/env python3
"""Download the usps train/test files (LIBSVM format) into data/.

Usage: python3 scripts/fetch_usps.py [target_dir]

Needs general network access; package-manager-only sandboxes cannot run
this. The acceptance tests that use usps skip until these files exist.
"""

import bz2
import sys
import urllib.request
from pathlib import Path

URLS = {
    "usps": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/usps.bz2",
    "usps.t": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/usps.t.bz2",
}


def main() -> int:
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data"
    target.mkdir(parents=True, exist_ok=True)
    for name, url in URLS.items():
        dest = target / name
        if dest.exists():
            print(f"{dest} already present")
            continue
        print(f"downloading {url}")
        with urllib.request.urlopen(url) as resp:
            raw = resp.read()
        dest.write_bytes(bz2.decompress(raw))
        print(f"wrote {dest} ({dest.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Fetch the 512x512 Lena test image and store it as an 8-bit binary PGM.

The image ships as a pickled integer array inside the scipy 0.16.1 source
distribution (scipy/misc/lena.dat). The sdist is downloaded from PyPI unless
--sdist points at a local copy.

    python3 tools/fetch_test_images.py            # writes tests/data/lena512.pgm
"""

import argparse
import hashlib
import io
import pickle
import sys
import tarfile
import urllib.request
from pathlib import Path

import numpy as np

SDIST_URL = (
    "https://pypi.org/packages/7b/e1/"
    "ecc1820874c396a094e6df30d4d3aa8119d4987c5ff0b9caec73db362849/scipy-0.16.1.tar.gz"
)
MEMBER = "scipy-0.16.1/scipy/misc/lena.dat"
MEMBER_SHA256 = "e4b434e02a6e33caea646aefc1c4d78abe750c7f2d4e58a254ad5e54498b71f4"


def read_member(sdist: Path | None) -> bytes:
    if sdist is None:
        with urllib.request.urlopen(SDIST_URL, timeout=120) as resp:
            blob = resp.read()
        archive = tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz")
    else:
        archive = tarfile.open(sdist, mode="r:gz")
    with archive:
        member = archive.extractfile(MEMBER)
        if member is None:
            raise SystemExit(f"{MEMBER} not found in the archive")
        return member.read()


def write_pgm(path: Path, image: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    h, w = image.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(image.astype(np.uint8).tobytes())


def main() -> int:
    root = Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--sdist", type=Path, help="local scipy-0.16.1.tar.gz instead of downloading")
    parser.add_argument("--out", type=Path, default=root / "tests" / "data" / "lena512.pgm")
    args = parser.parse_args()

    raw = read_member(args.sdist)
    digest = hashlib.sha256(raw).hexdigest()
    if digest != MEMBER_SHA256:
        raise SystemExit(f"checksum mismatch for lena.dat: {digest}")
    image = np.asarray(pickle.loads(raw, encoding="latin1"))
    if image.shape != (512, 512) or image.min() < 0 or image.max() > 255:
        raise SystemExit(f"unexpected image: shape {image.shape}, range [{image.min()}, {image.max()}]")
    write_pgm(args.out, image)
    print(f"wrote {args.out} (mean {image.mean():.2f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

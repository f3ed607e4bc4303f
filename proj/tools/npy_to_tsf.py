# Copyright 2026 The tsseg Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Convert MS-TCN .npy feature files (D x T float arrays) to tsseg .tsf files."""

import argparse
import pathlib
import struct

import numpy as np


def convert(src: pathlib.Path, dst: pathlib.Path) -> None:
    features = np.load(src).astype("<f4")
    if features.ndim != 2:
        raise ValueError(f"{src}: expected a 2-D array, got shape {features.shape}")
    frames = np.ascontiguousarray(features.T)
    if not np.isfinite(frames).all():
        raise ValueError(f"{src}: non-finite values")
    with open(dst, "wb") as out:
        out.write(b"TSF1")
        out.write(struct.pack("<II", frames.shape[0], frames.shape[1]))
        out.write(frames.tobytes())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("features", type=pathlib.Path, help="directory of .npy files")
    parser.add_argument("--out", type=pathlib.Path, help="output directory (default: same directory)")
    args = parser.parse_args()
    out_dir = args.out or args.features
    out_dir.mkdir(parents=True, exist_ok=True)
    files = sorted(args.features.glob("*.npy"))
    for src in files:
        convert(src, out_dir / (src.stem + ".tsf"))
    print(f"converted {len(files)} files into {out_dir}")


if __name__ == "__main__":
    main()

# Copyright 2026 The Optilearn Authors. All Rights Reserved.
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

"""Prepend cmake/license_header.txt to every source file that lacks it."""

import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
SKIP = {"build", "vendor", "examples", ".git", "node_modules"}
SLASH = {".cpp", ".hpp", ".h", ".cc"}
HASH = {".py", ".cmake"}
MARK = "Copyright 2026 The Optilearn Authors"


def style(path):
    name = path.name
    if name == "CMakeLists.txt":
        return "#"
    suffixes = path.suffixes
    if suffixes and suffixes[-1] == ".in" and len(suffixes) > 1:
        suffix = suffixes[-2]
    else:
        suffix = path.suffix
    if suffix in SLASH:
        return "//"
    if suffix in HASH:
        return "#"
    return None


def header_for(prefix):
    lines = (ROOT / "cmake" / "license_header.txt").read_text().splitlines()
    out = []
    for line in lines:
        body = line[2:] if line.startswith("//") else line
        out.append((prefix + body).rstrip())
    return "\n".join(out) + "\n\n"


def main():
    changed = 0
    for path in sorted(ROOT.rglob("*")):
        if not path.is_file() or any(part in SKIP for part in path.relative_to(ROOT).parts):
            continue
        prefix = style(path)
        if prefix is None:
            continue
        text = path.read_text()
        if MARK in "\n".join(text.splitlines()[:5]):
            continue
        header = header_for(prefix)
        if text.startswith("#!"):
            first, _, rest = text.partition("\n")
            text = first + "\n" + header + rest
        else:
            text = header + text
        path.write_text(text)
        changed += 1
        print(path.relative_to(ROOT))
    print(f"{changed} files updated", file=sys.stderr)


if __name__ == "__main__":
    main()

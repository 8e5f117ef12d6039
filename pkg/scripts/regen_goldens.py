"""Regenerate the frozen text fixtures under tests/goldens/.

Run from the repository root after an intentional change to the symbolic
engine's rendering or term order:

    python3 scripts/regen_goldens.py

The files are compared byte for byte by the tests, so regenerating them
is an explicit statement that the new output is the intended one.
"""

from __future__ import annotations

import pathlib

from pertlab.cli_io import serialize_bundle
from pertlab.fixtures import fixture_generate
from pertlab.operad_sym import (
    TruncationCaps,
    gen,
    kernel_Z,
    render_element,
    render_generator_diff,
    render_retraction_line,
)

GOLDENS = pathlib.Path(__file__).resolve().parent.parent / "tests" / "goldens"


def diff_lines_plain() -> str:
    zs = [gen(fam, i) for i in (2, 3, 4) for fam in ("f", "g")]
    return "".join(render_generator_diff(z) + "\n" for z in zs)


def diff_lines_extended() -> str:
    zs = [gen("xb"), gen("yb")]
    zs += [gen(fam, i) for i in (0, 1, 2) for fam in ("fb", "gb")]
    return "".join(render_generator_diff(z) + "\n" for z in zs)


def kernel_lines() -> str:
    caps = TruncationCaps(max_index=4, max_length=5, max_fweight=4, max_degree=8)
    out = []
    for r in (-1, 1, 3):
        out.append(f"Z{r} = " + render_element(kernel_Z(r, caps)) + "\n")
    return "".join(out)


def retraction_lines() -> str:
    zs = [gen("yb")]
    zs += [gen(fam, i) for i in range(4) for fam in ("fb", "gb")]
    return "".join(render_retraction_line(z) + "\n" for z in zs)


def main() -> None:
    GOLDENS.mkdir(parents=True, exist_ok=True)
    targets = {
        "diff_riso.txt": diff_lines_plain(),
        "diff_riso_tilde.txt": diff_lines_extended(),
        "kernels.txt": kernel_lines(),
        "retraction.txt": retraction_lines(),
        "fixture_seed0.json": serialize_bundle(fixture_generate(0)),
    }
    for name, text in targets.items():
        path = GOLDENS / name
        old = path.read_text() if path.exists() else None
        path.write_text(text)
        state = "unchanged" if old == text else ("rewritten" if old is not None else "created")
        print(f"{name}: {state} ({len(text)} bytes)")


if __name__ == "__main__":
    main()

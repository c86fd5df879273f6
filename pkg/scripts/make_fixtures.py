"""Regenerate the JSON fixtures shipped in src/bbreg/data.

Run from the repository root: ``python3 scripts/make_fixtures.py``.
"""

from pathlib import Path

import numpy as np

from bbreg import mockeuler as me
from bbreg import regulator as rg
from bbreg.cli import _dumps
from bbreg.coeffring import CoeffRing
from bbreg.groups import TowerSpec

DATA = Path(__file__).resolve().parent.parent / "src" / "bbreg" / "data"
DEMO_TOWER = TowerSpec(-163, (5, 11))
DEMO_RING = CoeffRing(3, 2)
# u_l = a_l / l^5 mod 9 for the weight-12 level-1 form (l = 5, 11)
DEMO_UNITS = {5: 3, 11: 6}
# lifts with (l + 1 - u)(l + 1 + u) prime to 3, so Lambda_S has index prime to p
UNIT_INDEX_UNITS = {5: 1, 11: 2}


def demo_system() -> me.MockEulerSystem:
    return me.gen_system(42, DEMO_TOWER, DEMO_RING, 1, DEMO_UNITS)


def zero_system() -> me.MockEulerSystem:
    sys_ = demo_system()
    for T in sys_.levels():
        sys_ = sys_.replace_level(T, np.zeros_like(sys_.y[T]))
    return sys_


def corrupted_system() -> me.MockEulerSystem:
    sys_ = demo_system()
    bad = sys_.y[5].copy()
    bad.reshape(-1)[1] += 1
    return sys_.replace_level(5, bad)


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    outputs = {
        "demo_system.json": demo_system().to_json(),
        "zero_system.json": zero_system().to_json(),
        "corrupted_system.json": corrupted_system().to_json(),
        "regulator_rank1.json": rg.random_configuration(7, DEMO_TOWER, DEMO_RING, 1, 55, UNIT_INDEX_UNITS).to_json(),
        "regulator_demo.json": rg.random_configuration(11, DEMO_TOWER, DEMO_RING, 2, 55, DEMO_UNITS).to_json(),
    }
    for name, obj in outputs.items():
        (DATA / name).write_text(_dumps(obj), encoding="utf-8")
        print(f"wrote {DATA / name}")


if __name__ == "__main__":
    main()

import sys
from pathlib import Path

import pytest

from obdm import ObdmSpec, StTgd, TBox, atom, cq, var

FIXTURES = Path(__file__).parent / "fixtures"

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def example1():
    spec = ObdmSpec(
        source_schema={"r1": 2, "r2": 1},
        tbox=TBox(),
        mapping=(
            StTgd("m1", (atom("r1", var("x"), var("y")),), (atom("G", var("x"), var("y")),)),
            StTgd("m2", (atom("r2", var("x")),), (atom("G", var("x"), var("Y")),)),
        ),
    )
    Qs = cq((var("w"),), (atom("r1", var("Z"), var("w")),))
    Qg = cq((var("w"),), (atom("G", var("Z"), var("w")),))
    return spec, Qs, Qg


@pytest.fixture
def example2():
    spec = ObdmSpec(
        source_schema={"man": 1, "woman": 1},
        tbox=TBox(),
        mapping=(
            StTgd("m1", (atom("man", var("x")),), (atom("Person", var("x")),)),
            StTgd("m2", (atom("woman", var("x")),), (atom("Person", var("x")),)),
        ),
    )
    Qs = cq((var("x"),), (atom("woman", var("x")),))
    Qg = cq((var("x"),), (atom("Person", var("x")),))
    return spec, Qs, Qg

import sys
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(DATA))

from make_fixtures import (  # noqa: E402
    LJ_for_alpha,
    TABLE1_L,
    TABLE1_NAMES,
    TABLE1_OMEGA,
    table1_g,
)

from iepr import io as fio  # noqa: E402
from iepr.circuit import BareParameters, attach_anharmonicity  # noqa: E402


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def table1_bare():
    return BareParameters(TABLE1_NAMES, np.array(TABLE1_OMEGA), table1_g())


@pytest.fixture
def table1_circuit():
    return fio.circuit_from_json(fio.load_json(DATA / "table1.json"))


@pytest.fixture
def dispersive_bare():
    """Transmon at 5000 MHz (alpha = -250) coupled with g = 100 to a 7000 MHz resonator."""
    LJ = LJ_for_alpha(5000.0, -250.0)
    bare = BareParameters(("q", "r"), [5000.0, 7000.0], [[0, 100.0], [100.0, 0]], None, [LJ, 0.0])
    return attach_anharmonicity(bare)

from __future__ import annotations

import pytest

from barrier_bound.oracles import ORACLES


@pytest.mark.parametrize("name", sorted(ORACLES))
def test_oracle_passes(name):
    rep = ORACLES[name]()
    assert rep.passed, (name, rep.max_defect, rep.tolerance)

import numpy as np
import pytest

from qmem.codes import get_code
from qmem.ec_cycles import (
    ANCILLAS,
    SURFACE_SCHEDULE,
    build_flag_tables,
    cycle_failures,
    fault_locations,
    make_cycle,
    noiseless_machine,
)
from qmem.noise import NoNoise
from qmem.pauli import PauliString, all_paulis
from qmem.sim import Machine, TableauBackend
from qmem.tableau import ConfigurationError

FT = [("five", "shor_ft"), ("five", "flag_ft"), ("steane", "shor_ft"), ("steane", "flag_ft"),
      ("surface9", "surface_ordered")]
NON_FT = [("five", "non_ft"), ("steane", "non_ft"), ("surface9", "non_ft")]


@pytest.mark.parametrize("code,style", FT)
@pytest.mark.parametrize("mode", ["native", "conjugated"])
def test_ft_certification(code, style, mode):
    """No single fault anywhere in the cycle leads to a logical flip."""
    assert cycle_failures(code, style, mode) == []


@pytest.mark.parametrize("code,style", [("five", "flag_ft"), ("steane", "flag_ft"), ("five", "shor_ft")])
def test_ft_certification_fixed_repeat(code, style):
    assert cycle_failures(code, style, repeat="fixed") == []


@pytest.mark.parametrize("code,style", NON_FT)
def test_non_ft_fails_certification(code, style):
    assert len(cycle_failures(code, style)) > 0


def test_single_round_surface_is_not_ft():
    assert len(cycle_failures("surface9", "surface_ordered", rounds=1)) > 0


@pytest.mark.parametrize("code,style", FT + NON_FT)
def test_noiseless_cycle_corrects_weight1(code, style):
    cyc = make_cycle(code, style)
    c = cyc.code
    errors = list(all_paulis(c.n, weight=1))
    n = len(errors)
    m = noiseless_machine(cyc.n_qubits, c.n, n)
    idx = np.arange(n)
    m.backend.apply_masks(range(c.n), np.array([e.x for e in errors]), np.array([e.z for e in errors]), idx)
    out = cyc.run(m, idx)
    assert list(out.syndrome) == [c.syndrome_of(e) for e in errors]
    fx, fz = m.backend.data_masks(range(c.n), idx)
    for x, z in zip(fx, fz):
        assert c.is_stabilizer(PauliString(c.n, int(x), int(z)))
    assert not out.flag_raised.any()


@pytest.mark.parametrize("code,style", [("five", "non_ft"), ("steane", "flag_ft"), ("surface9", "surface_ordered")])
def test_cycle_on_tableau_backend(code, style):
    """Same cycle on full tableaux: stabilizers and the logical survive a weight-1 error."""
    cyc = make_cycle(code, style)
    c = cyc.code
    rng = np.random.default_rng(5)
    for e in list(all_paulis(c.n, weight=1))[::4]:
        be = TableauBackend(cyc.n_qubits, [rng])
        be.load_ideal(c, "Z", np.array([1]), np.arange(1))
        be.apply_pauli(e, np.arange(1))
        cyc.run(Machine(be, NoNoise(), range(c.n)), np.arange(1))
        t = be.tabs[0]
        for g in c.stabilizers:
            assert t.peek(g.embed(cyc.n_qubits)) == 1
        assert t.peek(c.logical_z.embed(cyc.n_qubits)) == -1


def test_flag_tables_build_without_collisions():
    for code in ("five", "steane"):
        fx, fz = build_flag_tables(code)
        r = get_code(code).r
        assert fx.shape == (r, 2**r)


def test_surface_schedule_shape():
    code = get_code("surface9")
    for k, entries in SURFACE_SCHEDULE.items():
        qs = sorted(q for q, _ in entries)
        assert qs == code.stabilizers[k].support
        assert len({s for _, s in entries}) == len(entries)


def test_fault_location_counts():
    cyc = make_cycle("five", "non_ft")
    kinds = [k for _, k in fault_locations(cyc.run, cyc.n_qubits, 5)]
    # per check: prep, H, four couplings, measurement
    assert kinds.count("gate2") == 16
    assert kinds.count("meas") == 4
    assert ANCILLAS["surface_ordered"] == 6


def test_invalid_styles():
    with pytest.raises(ConfigurationError):
        make_cycle("surface9", "flag_ft")
    with pytest.raises(ConfigurationError):
        make_cycle("five", "surface_ordered")
    with pytest.raises(ConfigurationError):
        make_cycle("five", "magic")
    with pytest.raises(ConfigurationError):
        make_cycle("five", "non_ft", mode="teleported")

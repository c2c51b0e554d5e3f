import math

import numpy as np
import pytest

from hallspin.control import Delay, Program
from hallspin.ensemble import DisorderParams
from hallspin.model import coupling_table
from hallspin.sweeps import apply_sweep_param, rows_to_csv, run_sweep, sweep_values

from conftest import linear_chain


class TestApplySweepParam:
    def test_field_replaces_field_only(self, two_spin):
        stepped, disorder = apply_sweep_param(two_spin, DisorderParams(), "field", 3.3)
        assert stepped.field == 3.3
        assert np.array_equal(stepped.positions, two_spin.positions)
        assert stepped.coupling is two_spin.coupling
        assert disorder == DisorderParams()

    def test_spacing_rescales_minimum_separation(self):
        spec = linear_chain(3)
        stepped, _ = apply_sweep_param(spec, DisorderParams(), "spacing", 25.0)
        assert stepped.separation(0, 1) == pytest.approx(25.0, rel=1e-12)
        assert stepped.separation(0, 2) == pytest.approx(50.0, rel=1e-12)

    def test_coupling_sigma_updates_disorder(self, two_spin):
        stepped, disorder = apply_sweep_param(two_spin, DisorderParams(), "coupling-sigma", 0.07)
        assert stepped is two_spin
        assert disorder.coupling_scale_sigma == 0.07

    def test_unknown_param_rejected(self, two_spin):
        with pytest.raises(ValueError):
            apply_sweep_param(two_spin, DisorderParams(), "temperature", 1.0)

    def test_spacing_needs_two_spins(self):
        with pytest.raises(ValueError):
            apply_sweep_param(linear_chain(1), DisorderParams(), "spacing", 10.0)

    def test_field_and_spacing_steps_reproduce_scaling_collapse(self, two_spin):
        # stepping field to H2 while rescaling spacing by sqrt(H1/H2) keeps
        # r*sqrt(H) fixed, so H*J must collapse onto the same value
        h1 = two_spin.field
        r1 = two_spin.separation(0, 1)
        j1 = coupling_table(two_spin)[0][1]
        for h2 in (1.7, 4.0, 11.2):
            stepped, _ = apply_sweep_param(two_spin, DisorderParams(), "field", h2)
            stepped, _ = apply_sweep_param(
                stepped, DisorderParams(), "spacing", r1 * math.sqrt(h1 / h2)
            )
            j2 = coupling_table(stepped)[0][1]
            assert h2 * j2 == pytest.approx(h1 * j1, rel=1e-12)


class TestRunSweep:
    def test_deterministic(self, two_spin):
        program = Program(events=(Delay(1e-11),))
        values = sweep_values(0.0, 0.1, 4)
        kwargs = dict(
            observable=(0,),
            replicas=6,
            disorder=DisorderParams(position_jitter_sigma=0.3),
            seed=5,
        )
        a = run_sweep(two_spin, program, "coupling-sigma", values, **kwargs)
        b = run_sweep(two_spin, program, "coupling-sigma", values, **kwargs)
        assert a == b

    def test_csv_format(self, two_spin):
        program = Program(events=(Delay(0.0),))
        rows = run_sweep(two_spin, program, "field", sweep_values(4.0, 8.0, 2), (0,), 1)
        csv = rows_to_csv(rows)
        lines = csv.strip().split("\n")
        assert lines[0] == "param,mean,std_error,replicas"
        assert len(lines) == 3
        assert lines[1].split(",")[0] == "4.0"

    def test_rejects_bad_steps(self):
        with pytest.raises(ValueError):
            sweep_values(0.0, 1.0, 0)

"""Tests for the invariant verification suite."""

import math

import pytest

from maxwellgas.errors import ConfigError, VerificationError
from maxwellgas.verify import CHECKS, CheckResult, VerificationReport, run_verification

FAST_CHECKS = [
    "special_functions",
    "fourier_positivity",
    "mean_free_time_routes",
    "stokes_relation",
    "dufour_flux",
    "uniform_fluid_fixed_point",
    "lattice_bistochastic",
    "lattice_fixed_point",
]


class TestRunVerification:
    """Tests for run_verification."""

    def test_fast_checks_pass(self, nondim, transport_table):
        report = run_verification(nondim, transport_table, FAST_CHECKS)
        assert [c.name for c in report.checks] == FAST_CHECKS
        assert report.passed, report.failed

    @pytest.mark.parametrize("name", [
        "fluid_conservation",
        "lattice_chain",
        "free_time_normalization",
        "fundamental_relation_order",
        "galilean_covariance",
        "viscous_work_equivalence",
        "lattice_fluid_decay",
    ])
    def test_long_checks_pass(self, name, nondim, transport_table):
        report = run_verification(nondim, transport_table, [name])
        assert report.passed, report.checks[0].detail

    def test_threads_keep_order(self, nondim, transport_table):
        serial = run_verification(nondim, transport_table, FAST_CHECKS[:4])
        pooled = run_verification(nondim, transport_table, FAST_CHECKS[:4], threads=3)
        assert [c.name for c in pooled.checks] == [c.name for c in serial.checks]
        assert [c.value for c in pooled.checks] == [c.value for c in serial.checks]

    def test_unknown_check(self, nondim, transport_table):
        with pytest.raises(ConfigError, match="unknown check 'entropy'"):
            run_verification(nondim, transport_table, ["special_functions", "entropy"])

    def test_registry_names(self):
        assert len(CHECKS) == 15
        assert {"fundamental_relation_order", "galilean_covariance", "viscous_work_equivalence",
                "lattice_fluid_decay"} <= set(CHECKS)


class TestReport:
    """Tests for VerificationReport."""

    def test_to_dict(self):
        report = VerificationReport(checks=[
            CheckResult("a", True, 0.0, 1e-12),
            CheckResult("b", False, math.inf, 1e-6, "diverged"),
        ])
        data = report.to_dict()
        assert data["passed"] is False
        assert data["checks"][1] == {"name": "b", "passed": False, "value": math.inf,
                                     "tolerance": 1e-6, "detail": "diverged"}
        assert report.failed == ["b"]

    def test_failure_exit_code(self):
        error = VerificationError(["b"])
        assert error.exit_code == 4
        assert error.to_dict()["exit_code"] == 4

"""Tests for scenario parsing, validation and the initial-condition profiles."""

import copy
import json
from pathlib import Path

import numpy as np
import pytest
from jsonschema import Draft7Validator

from maxwellgas.config import (
    SCENARIO_SCHEMA,
    InitialConfig,
    THREADS_ENV,
    config_hash,
    get_thread_count,
    load_config,
    parse_config,
)
from maxwellgas.errors import ConfigError, PositivityError
from maxwellgas.fields import Grid
from maxwellgas.profiles import build_initial_state


def parse(document: dict):
    return parse_config(json.dumps(document))


def problems_of(document) -> list[str]:
    text = document if isinstance(document, str) else json.dumps(document)
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)
    return excinfo.value.problems


class TestParseConfig:
    """Tests for parse_config."""

    def test_fluid_defaults(self, fluid_document):
        config = parse(fluid_document)
        assert config.mode == "fluid"
        assert config.run.cfl == 0.4
        assert config.run.scheme == "ssprk2"
        assert config.run.dt is None
        assert config.grid.boundary == ["periodic"]
        assert config.quadrature.quad_tol == 1e-10
        assert config.quadrature.kappa_max == 12.0
        assert config.initial.params["field"] == "rho"

    def test_lattice_block(self, lattice_document):
        config = parse(lattice_document)
        assert config.lattice.bins == 12
        assert config.lattice.stochastic is False
        assert config.constants.to_constants().epsilon == 0.6

    def test_unknown_key_suggestion(self, fluid_document):
        fluid_document["transport"] = {"viscocity": 0.1}
        assert "transport.viscocity: unknown key (did you mean 'viscosity'?)" in problems_of(fluid_document)

    def test_non_positive_sigma(self, lattice_document):
        lattice_document["constants"]["sigma"] = 0
        assert "constants.sigma: must be strictly positive, got 0.0" in problems_of(lattice_document)

    def test_syntax_error_location(self):
        problems = problems_of('{\n  "mode": "fluid"\n  "constants": {}\n}')
        assert len(problems) == 1
        assert problems[0].startswith("JSON syntax error at line 3, column 3")

    def test_duplicate_key(self):
        problems = problems_of('{"mode": "verify", "mode": "fluid", "constants": {"nondimensional": true}}')
        assert problems == ['duplicate key "mode"']

    def test_problems_are_aggregated(self, fluid_document):
        fluid_document["run"]["cfl"] = -1
        fluid_document["grid"]["boundary"] = ["sticky"]
        fluid_document["extra"] = 1
        problems = problems_of(fluid_document)
        assert len(problems) >= 3
        assert any(p.startswith("run.cfl") for p in problems)
        assert any("sticky" in p for p in problems)
        assert any(p.startswith("extra: unknown key") for p in problems)

    def test_unknown_mode(self):
        problems = problems_of({"mode": "plasma"})
        assert problems[0].startswith('mode: unknown mode "plasma"')

    def test_missing_section(self, fluid_document):
        del fluid_document["run"]
        assert "run: required for mode 'fluid'" in problems_of(fluid_document)

    def test_dimensional_constants_must_be_complete(self, lattice_document):
        del lattice_document["constants"]["epsilon"]
        assert any(p.startswith("constants.epsilon: required") for p in problems_of(lattice_document))

    def test_nondimensional_excludes_explicit_constants(self, fluid_document):
        fluid_document["constants"]["sigma"] = 2.0
        assert any("nondimensional units fix sigma" in p for p in problems_of(fluid_document))

    def test_kappa_max_floor(self, fluid_document):
        fluid_document["quadrature"] = {"kappa_max": 8}
        assert any(p.startswith("quadrature.kappa_max") for p in problems_of(fluid_document))

    def test_lattice_occupation_range(self, lattice_document):
        lattice_document["lattice"]["occupation"] = 1.2
        assert any(p.startswith("lattice.occupation") for p in problems_of(lattice_document))

    def test_integer_kind(self, lattice_document):
        lattice_document["lattice"]["steps"] = 2.5
        assert "lattice.steps: expected an integer, got 2.5" in problems_of(lattice_document)

    def test_grid_broadcast(self, fluid_document):
        fluid_document["grid"] = {"cells": [8, 16], "length": [2.0]}
        grid = parse(fluid_document).grid.to_grid()
        assert grid.lengths == (2.0, 2.0)
        assert grid.boundary == ("periodic", "periodic")

    def test_schema_is_valid_draft7(self):
        Draft7Validator.check_schema(SCENARIO_SCHEMA)

    def test_scalar_stands_for_one_entry_list(self, fluid_document):
        fluid_document["grid"] = {"cells": 16, "length": 1, "boundary": "reflective"}
        grid = parse(fluid_document).grid
        assert grid.cells == [16]
        assert grid.length == [1.0]
        assert grid.boundary == ["reflective"]

    def test_unknown_profile_suggestion(self, fluid_document):
        fluid_document["initial"]["profile"] = "sinusiod"
        (problem,) = problems_of(fluid_document)
        assert problem.startswith('initial.profile: unknown profile "sinusiod"')
        assert problem.endswith("(did you mean 'sinusoid'?)")

    def test_profile_keys_are_checked(self, fluid_document):
        fluid_document["initial"]["wavelenght"] = 1.0
        assert "initial.wavelenght: unknown key (did you mean 'wavelength'?)" in problems_of(fluid_document)

    def test_type_problems(self, lattice_document):
        lattice_document["lattice"]["stochastic"] = "yes"
        lattice_document["seed"] = -1
        problems = problems_of(lattice_document)
        assert 'lattice.stochastic: expected true or false, got "yes"' in problems
        assert "seed: must be at least 0, got -1" in problems

    def test_lattice_sites_floor(self, lattice_document):
        lattice_document["lattice"]["sites"] = 3
        assert "lattice.sites: must be at least 4, got 3" in problems_of(lattice_document)

    def test_numbers_become_floats(self, fluid_document):
        fluid_document["run"]["t_end"] = 1
        assert isinstance(parse(fluid_document).run.t_end, float)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Cannot read config"):
            load_config(tmp_path / "absent.json")

    def test_load_from_file(self, write_config, fluid_document):
        assert load_config(write_config(fluid_document)).mode == "fluid"


class TestConfigHash:
    """Tests for config_hash."""

    def test_stable_under_key_order(self, fluid_document):
        reordered = dict(reversed(list(fluid_document.items())))
        assert config_hash(parse(fluid_document)) == config_hash(parse(reordered))

    def test_defaults_are_hashed(self, fluid_document):
        explicit = copy.deepcopy(fluid_document)
        explicit["run"]["cfl"] = 0.4
        assert config_hash(parse(fluid_document)) == config_hash(parse(explicit))

    def test_changes_with_content(self, fluid_document):
        changed = copy.deepcopy(fluid_document)
        changed["run"]["t_end"] = 0.003
        assert config_hash(parse(fluid_document)) != config_hash(parse(changed))


class TestThreadCount:
    """Tests for the worker thread cap."""

    def test_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert get_thread_count() == 1

    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "4")
        assert get_thread_count() == 4

    @pytest.mark.parametrize("value", ["0", "many"])
    def test_invalid(self, monkeypatch, value):
        monkeypatch.setenv(THREADS_ENV, value)
        with pytest.raises(ConfigError, match=THREADS_ENV):
            get_thread_count()


def initial(document: dict) -> InitialConfig:
    """Validated initial block from a bare profile document."""
    wrapper = {
        "mode": "fluid",
        "constants": {"nondimensional": True},
        "grid": {"cells": [16], "length": [1.0]},
        "initial": document,
        "run": {"t_end": 1.0},
    }
    return parse(wrapper).initial


class TestProfiles:
    """Tests for the initial-condition profiles."""

    def test_isobaric_bump(self):
        grid = Grid.uniform(32, 1.0, "periodic")
        state = build_initial_state(initial({
            "profile": "gaussian-bump", "rho": 0.5, "theta": 2.0, "amplitude": 0.1,
            "width": 0.1, "isobaric": True}), grid)
        assert np.allclose(state.rho * state.theta, 1.0)
        assert state.theta.max() == pytest.approx(2.0 * 1.1, rel=1e-2)

    def test_density_bump(self):
        grid = Grid.uniform(32, 1.0, "periodic")
        state = build_initial_state(initial({
            "profile": "gaussian-bump", "rho": 1.0, "theta": 1.0, "amplitude": 0.2,
            "width": 0.05, "field": "rho"}), grid)
        assert np.allclose(state.theta, 1.0)
        assert state.rho.max() > 1.15

    def test_shear_layer_has_two_jets(self):
        grid = Grid.uniform(64, 1.0, "periodic")
        state = build_initial_state(initial({
            "profile": "shear-layer", "rho": 1.0, "theta": 1.0, "velocity": 0.2,
            "thickness": 0.02}), grid)
        assert state.u[1].max() == pytest.approx(0.2, rel=1e-3)
        assert state.u[1].min() == pytest.approx(-0.2, rel=1e-3)

    def test_sod_like_needs_reflective_axis(self):
        params = initial({"profile": "sod-like", "rho_left": 1.0, "rho_right": 0.125,
                          "theta_left": 1.0, "theta_right": 0.8})
        with pytest.raises(ConfigError, match="reflective"):
            build_initial_state(params, Grid.uniform(32, 1.0, "periodic"))
        state = build_initial_state(params, Grid.uniform(32, 1.0, "reflective"))
        assert state.rho[0] == pytest.approx(1.0, rel=1e-6)
        assert state.rho[-1] == pytest.approx(0.125, rel=1e-5)

    def test_sinusoid_velocity(self):
        grid = Grid.uniform(16, 1.0, "periodic")
        state = build_initial_state(initial({
            "profile": "sinusoid", "rho": 1.0, "theta": 1.0, "amplitude": 0.1,
            "wavelength": 1.0, "field": "uy", "u": [0.5]}), grid)
        assert np.allclose(state.u[0], 0.5)
        assert np.allclose(state.u[1], 0.1 * np.sin(2 * np.pi * grid.coordinates(0)))

    def test_sinusoid_axis_must_exist(self):
        params = initial({"profile": "sinusoid", "rho": 1.0, "theta": 1.0, "amplitude": 0.1,
                          "wavelength": 1.0, "axis": 1})
        with pytest.raises(ConfigError, match="axis"):
            build_initial_state(params, Grid.uniform(16, 1.0, "periodic"))

    def test_negative_density_rejected(self):
        params = initial({"profile": "sinusoid", "rho": 1.0, "theta": 1.0, "amplitude": 1.5,
                          "wavelength": 1.0})
        with pytest.raises(PositivityError):
            build_initial_state(params, Grid.uniform(16, 1.0, "periodic"))


SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


class TestScenarioFiles:
    """The shipped example scenarios stay valid."""

    @pytest.mark.parametrize("path", sorted(SCENARIO_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_parses(self, path):
        config = load_config(path)
        assert path.stem.startswith(config.mode)
        if config.mode == "fluid":
            state = build_initial_state(config.initial, config.grid.to_grid())
            assert state.rho.shape == config.grid.to_grid().shape

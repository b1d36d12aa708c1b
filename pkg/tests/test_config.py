import json
import math

import pytest

from fiberloop.config import load, loads, parse_config
from fiberloop.errors import ConfigError

BASE = """
studies = ["entropy_profile", "samples"]
seed = 7
sample_count = 100

[architecture]
kind = "single_loop"
num_bins = 6
photons = 1
fock_dim = 4
couplers = [{theta_over_pi = 0.25, phi_over_pi = 0.5}]
"""


def test_toml_parse_and_angles():
    cfg = loads(BASE)
    spec = cfg.spec()
    assert spec.couplers[0].theta == pytest.approx(0.25 * math.pi)
    assert spec.couplers[0].phi == pytest.approx(0.5 * math.pi)
    assert spec.photons_per_bin == (1,) * 6
    assert cfg.seed == 7 and cfg.sample_count == 100
    assert cfg.studies == ("entropy_profile", "samples")


def test_json_round_trip():
    cfg = loads(BASE)
    again = loads(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()
    assert json.loads(cfg.to_json())["architecture"]["kind"] == "single_loop"


def test_photons_per_bin_defines_num_bins():
    cfg = parse_config(
        {"architecture": {"kind": "single_loop", "fock_dim": 3, "photons_per_bin": [1, 0, 2], "couplers": [{"theta_over_pi": 0.1}]}}
    )
    assert cfg.spec().photons_per_bin == (1, 0, 2)


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda t: t.replace("seed = 7", "seed = 7\ncolour = 1"), "colour"),
        (lambda t: t.replace("fock_dim = 4", "fock_dim = 4\nfock = 3"), "architecture.fock"),
        (lambda t: t.replace("theta_over_pi = 0.25", "theta = 0.25"), "architecture.couplers[0].theta"),
        (lambda t: t + "\n[convergence]\nenable = true\n", "convergence.enable"),
    ],
)
def test_unknown_fields_are_errors(mutate, field):
    with pytest.raises(ConfigError) as err:
        loads(mutate(BASE))
    assert field in str(err.value)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda t: t.replace("seed = 7", 'seed = "seven"'),
        lambda t: t.replace("photons = 1", "photons = 4"),
        lambda t: t.replace('"samples"', '"movies"'),
        lambda t: t.replace('kind = "single_loop"', 'kind = "loop_tower"\nnum_loops = 2'),
        lambda t: t.replace('kind = "single_loop"', 'kind = "moebius"'),
        lambda t: t.replace("sample_count = 100", "sample_count = 0"),
        lambda t: t.replace("[architecture]", "[architecture\n"),
        lambda t: t.replace("num_bins = 6", ""),
        lambda t: t.replace('"samples"', '"correlations"') + "\n[correlations]\nmax_separation = 6\n",
    ],
)
def test_invalid_configs(mutate):
    with pytest.raises(ConfigError):
        loads(mutate(BASE))


def test_state_studies_need_simulatable_kind():
    text = BASE.replace('kind = "single_loop"', 'kind = "tritter_cylinder"\nnum_loops = 3').replace(
        "couplers = [{theta_over_pi = 0.25, phi_over_pi = 0.5}]",
        "couplers = [{theta_over_pi = 0.25}, {theta_over_pi = 0.25}, {theta_over_pi = 0.25}]",
    )
    with pytest.raises(ConfigError):
        loads(text)
    cfg = loads(text.replace('studies = ["entropy_profile", "samples"]', 'studies = ["graph_report"]'))
    assert cfg.architecture.kind == "tritter_cylinder"


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "nope.toml")

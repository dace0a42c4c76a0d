import json

import numpy as np
import pytest

from largesol import ConfigurationError, PhiSpec, RunConfig, dump_config, parse_config
from largesol.config import PhiSection, sections
from largesol.fields import ConfigContext


def write_config(directory, data, name="config.json"):
    path = directory / name
    path.write_text(json.dumps(data))
    return str(path)


MINIMAL = {
    "phi": {"family": "power", "p": 2.0},
    "nonlinearity": {"family": "power", "gamma": 3.0},
}


def test_registry():
    assert sections.sections["PhiSection"] is PhiSection
    assert sections.sections["RunConfig"] is RunConfig


def test_defaults(tmp_path):
    config = parse_config(write_config(tmp_path, MINIMAL))
    assert config.geometry.N == 1
    assert config.geometry.L == 1.0
    assert config.run.k == 10.0
    assert config.run.seed == 0
    assert config.run.ladder == [2.0**i for i in range(1, 11)]
    assert config.compact_radius == pytest.approx(0.8)
    assert config.weight.constant == 1.0
    assert config.phi.build() == PhiSpec.power(2.0)
    assert config.nonlinearity.build().params == {"gamma": 3.0}
    assert config.weight.build().is_radial


def test_explicit_values(tmp_path):
    data = dict(
        MINIMAL,
        geometry={"N": 3, "L": 2.0, "compact_radius": 1.5},
        run={"k_ladder": [1, 2, 4], "which": "upper", "budget": "H-tilde"},
        weight={
            "lower": {"family": "saturating", "value": 1.0},
            "upper": {"family": "constant", "value": 1.0},
        },
    )
    config = parse_config(write_config(tmp_path, data))
    assert config.geometry.N == 3
    assert config.compact_radius == 1.5
    assert config.run.ladder == [1.0, 2.0, 4.0]
    assert config.run.which == "upper"
    assert config.weight.constant is None
    weight = config.weight.build()
    assert not weight.is_radial
    assert weight.osc(0.0) == pytest.approx(1.0)


def test_explicit_ball_envelopes(tmp_path):
    bounds = {
        "lower": {"family": "saturating", "value": 1.0},
        "upper": {"family": "constant", "value": 1.0},
    }
    weight = dict(
        bounds,
        ball_lower={"family": "constant", "value": 0.25},
        ball_upper={"family": "constant", "value": 2.0},
    )
    config = parse_config(write_config(tmp_path, dict(MINIMAL, weight=weight)))
    spec = config.weight.build()
    assert float(spec.ball_lower(3.0)) == pytest.approx(0.25)
    assert float(spec.ball_upper(0.0)) == pytest.approx(2.0)
    assert float(spec.osc(0.0)) == pytest.approx(1.0)

    weight = dict(bounds, ball_upper={"family": "constant", "value": 2.0})
    config = parse_config(write_config(tmp_path, dict(MINIMAL, weight=weight)))
    spec = config.weight.build()
    # the running minimum of 1 − e^(−r) stays at its value in the centre
    assert float(spec.ball_lower(5.0)) == pytest.approx(0.0, abs=1e-12)
    assert float(spec.ball_upper(5.0)) == pytest.approx(2.0)

    config = parse_config(write_config(tmp_path, dict(MINIMAL, weight=bounds)))
    assert config.weight.build().ball_lower is None


def test_missing_required_block(tmp_path):
    with pytest.raises(ConfigurationError, match="missing required key 'nonlinearity'"):
        parse_config(write_config(tmp_path, {"phi": {"family": "power", "p": 2.0}}))


def test_unknown_keys(tmp_path):
    with pytest.raises(ConfigurationError, match="unknown key 'colour'"):
        parse_config(write_config(tmp_path, dict(MINIMAL, colour="blue")))
    with pytest.raises(ConfigurationError, match="geometry: unknown key 'R'"):
        parse_config(write_config(tmp_path, dict(MINIMAL, geometry={"R": 1.0})))


def test_invalid_values(tmp_path):
    with pytest.raises(ConfigurationError, match="geometry"):
        parse_config(write_config(tmp_path, dict(MINIMAL, geometry={"N": 0})))
    with pytest.raises(ConfigurationError, match="phi"):
        parse_config(write_config(tmp_path, {**MINIMAL, "phi": {"family": "cubic"}}))
    with pytest.raises(ConfigurationError):
        parse_config(write_config(tmp_path, dict(MINIMAL, run={"samples": 10})))


def with_phi(directory, phi):
    return parse_config(write_config(directory, {**MINIMAL, "phi": phi}))


def test_family_parameters(tmp_path):
    config = with_phi(tmp_path, {"family": "power"})
    with pytest.raises(ConfigurationError, match="needs the parameter 'p'"):
        config.phi.build()

    config = with_phi(tmp_path, {"family": "power", "p": 0.5})
    with pytest.raises(ConfigurationError, match="phi"):
        config.phi.build()

    config = with_phi(tmp_path, {"family": "custom"})
    with pytest.raises(ConfigurationError, match="table"):
        config.phi.build()


def test_bad_files(tmp_path):
    with pytest.raises(ConfigurationError, match="does not exist"):
        parse_config(str(tmp_path / "missing.json"))

    path = tmp_path / "broken.json"
    path.write_text('{\n  "phi": {\n    "family": power\n  }\n}\n')
    with pytest.raises(ConfigurationError, match="broken.json:3"):
        parse_config(str(path))

    path.write_text("[1, 2]")
    with pytest.raises(ConfigurationError, match="JSON object"):
        parse_config(str(path))


def test_table_backed_config(tmp_path):
    t = np.logspace(-6.0, 6.0, 49)
    np.savetxt(tmp_path / "phi.txt", np.column_stack([t, 3.0 * t]))
    data = {
        "phi": {"family": "custom", "table": "phi.txt"},
        "nonlinearity": {"family": "power", "gamma": 2.0},
        "geometry": {"N": 2},
    }
    config = parse_config(write_config(tmp_path, data))
    phi = config.phi.build()
    assert phi.family == "custom"
    assert phi.phi(2.0) == pytest.approx(6.0)

    target = tmp_path / "copy"
    target.mkdir()
    dump_config(config, str(target / "config.json"))
    assert (target / "phi-table.table").exists()
    again = parse_config(str(target / "config.json"))
    assert again == config
    assert again.phi.build() == phi


def test_missing_table_file(tmp_path):
    data = {**MINIMAL, "phi": {"family": "custom", "table": "absent.txt"}}
    with pytest.raises(ConfigurationError, match="absent.txt"):
        parse_config(write_config(tmp_path, data))


def test_section_keywords():
    with pytest.raises(ConfigurationError, match="Invalid keyword colour"):
        PhiSection(colour="blue")


def test_context():
    context = ConfigContext("/tmp/run").child("weight").child("lower")
    assert context.prefix == "weight-lower"
    assert context.resolve("a.txt") == "/tmp/run/a.txt"
    assert context.resolve("/abs/a.txt") == "/abs/a.txt"

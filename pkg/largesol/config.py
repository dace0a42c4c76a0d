import json
import logging
import os
import typing

import typesystem

from largesol.constants import (
    CONSTANT,
    CONSTANT_TWO,
    ELASTICITY,
    ELASTICITY_SQRT,
    EXPONENTIAL,
    H_BAR,
    H_TILDE,
    LOWER,
    NONLINEARITY_FAMILIES,
    P_AND_Q,
    PHI_FAMILIES,
    PLASTICITY_LOG,
    POWER,
    WEIGHT_COMPONENTS,
    WEIGHT_FAMILIES,
)
from largesol.exceptions import ConfigurationError, DomainError
from largesol.fields import (
    Boolean,
    Choice,
    ConfigContext,
    ConfigField,
    Float,
    FloatList,
    Integer,
    Section,
    TablePath,
    require_table,
)
from largesol.nfunction import PhiSpec
from largesol.problems import NonlinearitySpec, WeightSpec, weight_function

logger = logging.getLogger(__name__)


class SectionRegistry:
    def __init__(self) -> None:
        self.sections: typing.Dict[str, type] = {}


sections = SectionRegistry()


class SectionMeta(type):
    def __new__(cls, name: str, bases: tuple, attrs: dict) -> type:
        section_class = super().__new__(cls, name, bases, attrs)

        if "registry" in attrs:
            attrs["registry"].sections[name] = section_class

        for field in attrs.get("fields", {}).values():
            setattr(field, "registry", attrs.get("registry"))

        return section_class


class ConfigSection(metaclass=SectionMeta):
    fields: typing.Dict[str, ConfigField] = {}

    def __init__(self, **kwargs: typing.Any) -> None:
        for key, value in kwargs.items():
            if key not in self.fields:
                raise ConfigurationError(
                    f"Invalid keyword {key} for section {self.__class__.__name__}"
                )
            setattr(self, key, value)

    @classmethod
    def from_mapping(
        cls, data: typing.Dict[str, typing.Any], context: ConfigContext
    ) -> "ConfigSection":
        where = context.prefix or "config"
        for key in data:
            if key not in cls.fields:
                raise ConfigurationError(f"{where}: unknown key {key!r}")
        for key, field in cls.fields.items():
            if key not in data and not field.validator.has_default():
                raise ConfigurationError(f"{where}: missing required key {key!r}")
        validator = typesystem.Schema(
            fields={key: field.validator for key, field in cls.fields.items()}
        )
        try:
            values = validator.validate(data)
        except typesystem.ValidationError as exc:
            messages = ", ".join(f"{key}: {text}" for key, text in dict(exc).items())
            raise ConfigurationError(f"{where}: {messages}") from None
        expanded = {
            key: field.expand(values.get(key), context.child(key))
            for key, field in cls.fields.items()
        }
        return cls(**expanded)

    def to_mapping(self, context: ConfigContext) -> typing.Dict[str, typing.Any]:
        data = {}
        for key, field in self.fields.items():
            value = field.collapse(getattr(self, key, None), context.child(key))
            if value is not None:
                data[key] = value
        return data

    def __eq__(self, other: typing.Any) -> bool:
        return isinstance(other, self.__class__) and all(
            getattr(self, key, None) == getattr(other, key, None) for key in self.fields
        )

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}: {self}>"

    def __str__(self) -> str:
        values = ", ".join(
            f"{key}={getattr(self, key, None)!r}"
            for key in self.fields
            if getattr(self, key, None) is not None
        )
        return f"{self.__class__.__name__}({values})"


def _needs(value: typing.Optional[float], name: str, family: str) -> float:
    if value is None:
        raise ConfigurationError(f"family {family!r} needs the parameter {name!r}")
    return value


class PhiSection(ConfigSection):
    registry = sections
    fields = {
        "family": Choice(PHI_FAMILIES),
        "p": Float(allow_null=True),
        "q": Float(allow_null=True),
        "gamma": Float(allow_null=True),
        "table": TablePath(allow_null=True),
    }

    def build(self) -> PhiSpec:
        family = self.family
        try:
            if family == CONSTANT_TWO:
                return PhiSpec.constant_two()
            if family == POWER:
                return PhiSpec.power(_needs(self.p, "p", family))
            if family == P_AND_Q:
                return PhiSpec.p_and_q(
                    _needs(self.p, "p", family), _needs(self.q, "q", family)
                )
            if family == ELASTICITY:
                return PhiSpec.elasticity(_needs(self.gamma, "gamma", family))
            if family == ELASTICITY_SQRT:
                return PhiSpec.elasticity_sqrt(_needs(self.gamma, "gamma", family))
            if family == PLASTICITY_LOG:
                return PhiSpec.plasticity_log(_needs(self.p, "p", family))
            return PhiSpec.from_table(require_table(self.table, "custom phi"))
        except DomainError as exc:
            raise ConfigurationError(f"phi: {exc}") from None


class NonlinearitySection(ConfigSection):
    registry = sections
    fields = {
        "family": Choice(NONLINEARITY_FAMILIES),
        "gamma": Float(allow_null=True),
        "table": TablePath(allow_null=True),
        "monotone": Boolean(allow_null=True),
    }

    def build(self) -> NonlinearitySpec:
        try:
            if self.family == POWER:
                return NonlinearitySpec.power(_needs(self.gamma, "gamma", POWER))
            if self.family == EXPONENTIAL:
                return NonlinearitySpec.exponential()
            table = require_table(self.table, "custom nonlinearity")
            return NonlinearitySpec.from_table(table, monotone=self.monotone)
        except DomainError as exc:
            raise ConfigurationError(f"nonlinearity: {exc}") from None


class WeightFunctionSection(ConfigSection):
    registry = sections
    fields = {
        "family": Choice(WEIGHT_FAMILIES, default=CONSTANT),
        "value": Float(minimum=0.0, default=1.0),
        "rate": Float(exclusive_minimum=0.0, default=1.0),
        "exponent": Float(exclusive_minimum=0.0, default=2.0),
        "table": TablePath(allow_null=True),
    }

    @property
    def constant(self) -> typing.Optional[float]:
        return self.value if self.family == CONSTANT else None

    def build(self) -> typing.Callable:
        return weight_function(
            self.family,
            value=self.value,
            rate=self.rate,
            exponent=self.exponent,
            table=self.table,
        )


class WeightSection(ConfigSection):
    registry = sections
    fields = {
        "lower": Section("WeightFunctionSection", allow_null=True),
        "upper": Section("WeightFunctionSection", allow_null=True),
        "ball_lower": Section("WeightFunctionSection", allow_null=True),
        "ball_upper": Section("WeightFunctionSection", allow_null=True),
        "ball_envelopes": Boolean(default=False),
        "ball_radius": Float(exclusive_minimum=0.0, default=1e3),
    }

    @property
    def constant(self) -> typing.Optional[float]:
        """
        The value of a radial constant weight, or None.
        """
        parts = [part for part in (self.lower, self.upper) if part is not None]
        if not parts:
            return 1.0
        values = {part.constant for part in parts}
        if len(values) == 1 and None not in values:
            return values.pop()
        return None

    def build(self) -> WeightSpec:
        """
        Explicit ball envelopes take precedence; a missing one is the running
        extremum of the radial envelopes when `ball_envelopes` is set or the
        other one is given.
        """
        lower = self.lower or self.upper
        upper = self.upper or self.lower
        try:
            if lower is None or upper is None:
                spec = WeightSpec.radial(weight_function(CONSTANT, value=1.0))
            elif lower == upper:
                spec = WeightSpec.radial(lower.build())
            else:
                spec = WeightSpec.bounds(lower.build(), upper.build())
            explicit = self.ball_lower is not None or self.ball_upper is not None
            if self.ball_envelopes or explicit:
                spec = spec.with_ball_envelopes(r_max=self.ball_radius)
            if explicit:
                spec = WeightSpec(
                    spec.lower,
                    spec.upper,
                    ball_lower=(
                        self.ball_lower.build() if self.ball_lower else spec.ball_lower
                    ),
                    ball_upper=(
                        self.ball_upper.build() if self.ball_upper else spec.ball_upper
                    ),
                    is_radial=spec.is_radial,
                )
        except DomainError as exc:
            raise ConfigurationError(f"weight: {exc}") from None
        return spec


class GeometrySection(ConfigSection):
    registry = sections
    fields = {
        "N": Integer(minimum=1, default=1),
        "L": Float(exclusive_minimum=0.0, default=1.0),
        "horizon": Float(exclusive_minimum=0.0, default=50.0),
        "compact_radius": Float(exclusive_minimum=0.0, allow_null=True),
    }


class RunSection(ConfigSection):
    registry = sections
    fields = {
        "alpha": Float(exclusive_minimum=0.0, default=1.0),
        "alphas": FloatList(allow_null=True),
        "epsilon": Float(exclusive_minimum=0.0, default=0.1),
        "k": Float(minimum=0.0, default=10.0),
        "k_ladder": FloatList(allow_null=True),
        "tol": Float(exclusive_minimum=0.0, default=1e-8),
        "rtol": Float(exclusive_minimum=0.0, default=1e-10),
        "atol": Float(exclusive_minimum=0.0, default=1e-12),
        "r_max": Float(exclusive_minimum=0.0, default=1.0),
        "points": Integer(minimum=2, default=201),
        "cutoffs": FloatList(allow_null=True),
        "analytic": Boolean(default=True),
        "which": Choice(WEIGHT_COMPONENTS, default=LOWER),
        "budget": Choice([H_BAR, H_TILDE], default=H_BAR),
        "samples": Integer(minimum=10000, default=10000),
        "seed": Integer(default=0),
        "fd_cells": Integer(minimum=64, default=4096),
        "fd_tol": Float(exclusive_minimum=0.0, default=1e-10),
        "threads": Integer(minimum=1, default=1),
    }

    @property
    def ladder(self) -> typing.List[float]:
        if self.k_ladder is not None:
            return list(self.k_ladder)
        return [2.0**i for i in range(1, 11)]


class RunConfig(ConfigSection):
    registry = sections
    fields = {
        "phi": Section("PhiSection"),
        "nonlinearity": Section("NonlinearitySection"),
        "weight": Section("WeightSection", default=dict),
        "geometry": Section("GeometrySection", default=dict),
        "run": Section("RunSection", default=dict),
    }

    @property
    def compact_radius(self) -> float:
        if self.geometry.compact_radius is not None:
            return self.geometry.compact_radius
        return 0.8 * self.geometry.L


def parse_config(path: str) -> RunConfig:
    """
    Read a JSON run configuration. Unknown keys and missing required blocks
    raise ConfigurationError.
    """
    if not os.path.isfile(path):
        raise ConfigurationError(f"config file {path!r} does not exist")
    with open(path, encoding="utf8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: the config must be a JSON object")
    context = ConfigContext(os.path.dirname(os.path.abspath(path)))
    config = RunConfig.from_mapping(data, context)
    logger.debug("parsed %s: %s", path, config)
    return typing.cast(RunConfig, config)


def dump_config(config: RunConfig, path: str) -> None:
    """
    Write a config that parse_config reads back equal. Tables are written
    next to it.
    """
    context = ConfigContext(os.path.dirname(os.path.abspath(path)))
    data = config.to_mapping(context)
    with open(path, "w", encoding="utf8") as f:
        f.write(json.dumps(data, sort_keys=True, indent=2) + "\n")

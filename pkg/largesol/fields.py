import dataclasses
import os
import typing

import typesystem

from largesol.exceptions import ConfigurationError
from largesol.tables import Table, load_table, write_table


@dataclasses.dataclass
class ConfigContext:
    """
    Where a config lives on disk, and the dotted position inside it.
    """

    base_dir: str
    prefix: str = ""

    def child(self, name: str) -> "ConfigContext":
        prefix = f"{self.prefix}-{name}" if self.prefix else name
        return ConfigContext(self.base_dir, prefix)

    def resolve(self, path: str) -> str:
        if os.path.isabs(path):
            return path
        return os.path.join(self.base_dir, path)


class ConfigField:
    def __init__(self, **kwargs: typing.Any) -> None:
        self.allow_null = kwargs.get("allow_null", False)
        self.validator = self.get_validator(**kwargs)

    def get_validator(self, **kwargs: typing.Any) -> typesystem.Field:
        raise NotImplementedError()  # pragma: no cover

    def expand(self, value: typing.Any, context: ConfigContext) -> typing.Any:
        return value

    def collapse(self, value: typing.Any, context: ConfigContext) -> typing.Any:
        return value


class Float(ConfigField):
    def get_validator(self, **kwargs: typing.Any) -> typesystem.Field:
        return typesystem.Float(**kwargs)

    def expand(self, value: typing.Any, context: ConfigContext) -> typing.Any:
        return None if value is None else float(value)


class Integer(ConfigField):
    def get_validator(self, **kwargs: typing.Any) -> typesystem.Field:
        return typesystem.Integer(**kwargs)


class Boolean(ConfigField):
    def get_validator(self, **kwargs: typing.Any) -> typesystem.Field:
        return typesystem.Boolean(**kwargs)


class Choice(ConfigField):
    def __init__(self, choices: typing.Sequence[str], **kwargs: typing.Any) -> None:
        self.choices = list(choices)
        super().__init__(**kwargs)

    def get_validator(self, **kwargs: typing.Any) -> typesystem.Field:
        return typesystem.Choice(choices=[(c, c) for c in self.choices], **kwargs)


class FloatList(ConfigField):
    def get_validator(self, **kwargs: typing.Any) -> typesystem.Field:
        return typesystem.Array(items=typesystem.Float(), **kwargs)

    def expand(self, value: typing.Any, context: ConfigContext) -> typing.Any:
        return None if value is None else [float(v) for v in value]


class TablePath(ConfigField):
    """
    A two-column table file. Relative paths resolve against the config's
    directory; dumping writes the table next to the dumped config.
    """

    def get_validator(self, **kwargs: typing.Any) -> typesystem.Field:
        return typesystem.String(**kwargs)

    def expand(self, value: typing.Any, context: ConfigContext) -> typing.Any:
        if value is None:
            return None
        return load_table(context.resolve(value))

    def collapse(self, value: typing.Any, context: ConfigContext) -> typing.Any:
        if value is None:
            return None
        filename = f"{context.prefix}.table"
        write_table(value, os.path.join(context.base_dir, filename))
        return filename


class Section(ConfigField):
    class SectionValidator(typesystem.Field):
        errors = {"type": "Must be an object.", "null": "May not be null."}

        def validate(self, value: typing.Any, *, strict: bool = False) -> typing.Any:
            if value is None and self.allow_null:
                return None
            if value is None:
                raise self.validation_error("null")
            if not isinstance(value, dict):
                raise self.validation_error("type")
            return value

    def __init__(self, to: typing.Union[str, type], **kwargs: typing.Any) -> None:
        super().__init__(**kwargs)
        self.to = to

    @property
    def target(self) -> typing.Any:
        if not hasattr(self, "_target"):
            if isinstance(self.to, str):
                self._target = self.registry.sections[self.to]
            else:
                self._target = self.to
        return self._target

    def get_validator(self, **kwargs: typing.Any) -> typesystem.Field:
        return self.SectionValidator(**kwargs)

    def expand(self, value: typing.Any, context: ConfigContext) -> typing.Any:
        if value is None:
            return None
        if isinstance(value, self.target):
            return value
        return self.target.from_mapping(value, context)

    def collapse(self, value: typing.Any, context: ConfigContext) -> typing.Any:
        if value is None:
            return None
        return value.to_mapping(context)


def require_table(table: typing.Optional[Table], what: str) -> Table:
    if table is None:
        raise ConfigurationError(f"{what} needs a 'table' entry")
    return table

import json
import math
import os
import typing

import numpy as np

from largesol.radial import RadialProfile

PROFILE_COLUMNS = ("r", "u", "du", "Q")


def to_json_value(value: typing.Any) -> typing.Any:
    """
    Plain JSON data from reports: numpy values become Python values and
    non-finite floats become null.
    """
    if isinstance(value, dict):
        return {str(key): to_json_value(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_value(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_json_value(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps(data: typing.Any) -> str:
    return json.dumps(to_json_value(data), sort_keys=True, indent=2) + "\n"


def write_json(data: typing.Any, path: str) -> str:
    with open(path, "w", encoding="utf8") as f:
        f.write(dumps(data))
    return path


def write_profile(profile: RadialProfile, out_dir: str, name: str) -> str:
    """
    Write `name.csv` (columns r, u, du, Q at 17 significant digits) and the
    `name.meta.json` sidecar.
    """
    path = os.path.join(out_dir, f"{name}.csv")
    table = np.column_stack([profile.grid, profile.u, profile.du, profile.flux])
    header = ",".join(PROFILE_COLUMNS)
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=header, comments="")
    write_json(profile.metadata(), os.path.join(out_dir, f"{name}.meta.json"))
    return path


def read_profile(path: str) -> typing.Dict[str, np.ndarray]:
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {column: table[:, i] for i, column in enumerate(PROFILE_COLUMNS)}

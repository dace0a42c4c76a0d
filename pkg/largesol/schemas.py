import typing

import typesystem

from largesol.constants import (
    ANALYTIC,
    BLOW_UP,
    COMMANDS,
    COMPLETED,
    CONVERGES,
    DIVERGES,
    FAILS,
    FD,
    FITTED,
    GLOBAL,
    GLOBAL_UNCONFIRMED,
    GROWTH_LOWER_WEIGHT,
    HOLDS,
    INCONCLUSIVE,
    KELLER_OSSERMAN,
    OSCILLATION_BUDGET,
    RESULTS,
    SAMPLED,
    SHOOTING,
    SUBADDITIVITY,
)
from largesol.exceptions import SolverDefect


def _choice(*values: str, **kwargs: typing.Any) -> typesystem.Field:
    return typesystem.Choice(choices=[(v, v) for v in values], **kwargs)


def _numbers(**kwargs: typing.Any) -> typesystem.Field:
    return typesystem.Array(items=typesystem.Float(allow_null=True), **kwargs)


VERDICT = _choice(CONVERGES, DIVERGES, INCONCLUSIVE, HOLDS, FAILS)
STATUS = _choice(COMPLETED, BLOW_UP, GLOBAL, GLOBAL_UNCONFIRMED)

BLOWUP_FIELDS = {
    "alpha": typesystem.Float(),
    "gamma": typesystem.Float(allow_null=True),
    "bracket": _numbers(min_items=2, max_items=2),
    "threshold": typesystem.Float(),
    "status": STATUS,
    "crossings": typesystem.Array(items=_numbers(min_items=2, max_items=2)),
}

REPORTS = {
    "condition": typesystem.Schema(
        fields={
            "condition_id": typesystem.String(),
            "cutoffs": _numbers(),
            "partial_values": _numbers(),
            "verdict": VERDICT,
            "confidence": _choice(ANALYTIC, FITTED, SAMPLED),
            "fitted_tail_exponent": typesystem.Float(allow_null=True),
            "residual": typesystem.Float(allow_null=True),
            "fitted_verdict": typesystem.String(allow_null=True),
            "value": typesystem.Float(allow_null=True),
            "witness": typesystem.Object(
                properties={
                    "s": typesystem.Float(),
                    "t": typesystem.Float(),
                    "violation": typesystem.Float(),
                },
                allow_null=True,
            ),
            "notes": typesystem.Array(items=typesystem.String()),
        }
    ),
    "indices": typesystem.Schema(
        fields={
            "family": typesystem.String(),
            "phi": typesystem.Any(),
            "phi_positive": typesystem.Boolean(),
            "h_increasing": typesystem.Boolean(),
            "ratio_range": _numbers(min_items=2, max_items=2),
            "derivative_ratio_range": _numbers(min_items=2, max_items=2),
            "indices": typesystem.Object(
                properties={
                    "l": typesystem.Float(),
                    "m": typesystem.Float(),
                    "l1": typesystem.Float(),
                    "m1": typesystem.Float(),
                }
            ),
            "holds": typesystem.Boolean(),
            "plasticity_constraint": typesystem.Object(
                properties={
                    "N": typesystem.Integer(),
                    "value": typesystem.Float(),
                    "satisfied": typesystem.Boolean(),
                },
                allow_null=True,
            ),
        }
    ),
    "profile": typesystem.Schema(
        fields={
            "source": _choice(SHOOTING, FD),
            "status": STATUS,
            "N": typesystem.Integer(minimum=1),
            "alpha": typesystem.Float(),
            "radius": typesystem.Float(),
            "points": typesystem.Integer(minimum=1),
            "gamma": typesystem.Float(allow_null=True),
            "bracket": _numbers(allow_null=True),
            "params": typesystem.Any(),
            "flux_residual": typesystem.Float(allow_null=True),
        }
    ),
    "blowup": typesystem.Schema(fields=BLOWUP_FIELDS),
    "existence": typesystem.Schema(
        fields={
            "alphas": _numbers(),
            "results": typesystem.Array(
                items=typesystem.Object(properties=BLOWUP_FIELDS)
            ),
            "threshold": typesystem.Float(allow_null=True),
            "threshold_infinite": typesystem.Boolean(),
        }
    ),
    "sandwich": typesystem.Schema(
        fields={
            "radii": _numbers(),
            "lower": _numbers(),
            "upper": _numbers(),
            "lower_margin": _numbers(),
            "upper_margin": _numbers(),
            "skipped": typesystem.Array(items=typesystem.Boolean()),
            "passed": typesystem.Boolean(),
        }
    ),
    "sweep": typesystem.Schema(
        fields={
            "k_sequence": _numbers(),
            "compact_radius": typesystem.Float(),
            "radii": _numbers(),
            "limit": _numbers(),
            "raw_increments": _numbers(),
            "extrapolated_increments": _numbers(),
            "stabilized": typesystem.Boolean(),
            "centre_values": _numbers(),
        }
    ),
    "certificate": typesystem.Schema(
        fields={
            "alpha": typesystem.Float(),
            "beta": typesystem.Float(),
            "epsilon": typesystem.Float(),
            "budget": typesystem.Float(),
            "budget_verdict": typesystem.String(),
            "budget_truncated": typesystem.Boolean(),
            "ordered": typesystem.Boolean(),
            "worst_margin": typesystem.Float(),
            "estimate_from": typesystem.Float(allow_null=True),
            "estimate_holds": typesystem.Boolean(),
            "minorant_holds": typesystem.Boolean(),
            "horizon": typesystem.Float(),
            "passed": typesystem.Boolean(),
        }
    ),
    "fd-check": typesystem.Schema(
        fields={
            "M": typesystem.Integer(minimum=64),
            "k": typesystem.Float(),
            "sweeps": typesystem.Array(items=typesystem.Integer()),
            "sup_gap": typesystem.Float(),
            "shooting_centre": typesystem.Float(),
            "fd_centre": typesystem.Float(),
            "comparison": typesystem.Object(
                properties={
                    "ordered": typesystem.Boolean(),
                    "equal": typesystem.Boolean(),
                    "worst_margin": typesystem.Float(),
                    "worst_radius": typesystem.Float(),
                    "tolerance": typesystem.Float(),
                }
            ),
        }
    ),
    "rejection": typesystem.Schema(
        fields={
            "hypothesis": _choice(
                KELLER_OSSERMAN, GROWTH_LOWER_WEIGHT, OSCILLATION_BUDGET, SUBADDITIVITY
            ),
            "verdict": typesystem.String(),
            "reason": typesystem.String(),
            "theorem": _choice(*RESULTS),
        }
    ),
    "run": typesystem.Schema(
        fields={
            "command": _choice(*COMMANDS),
            "seed": typesystem.Integer(),
            "report": typesystem.Any(),
            "report_schema": typesystem.String(),
        }
    ),
}

COMMAND_REPORTS = {
    "indices": "indices",
    "check-ko": "condition",
    "check-arho": "condition",
    "budget": "condition",
    "subadd": "condition",
    "solve-ivp": "profile",
    "solve-ball": "profile",
    "verify-bounds": "sandwich",
    "sweep": "sweep",
    "entire": "certificate",
    "fd-check": "fd-check",
}


def validate_report(
    name: str, data: typing.Dict[str, typing.Any]
) -> typing.Dict[str, typing.Any]:
    """
    Check a JSON-ready report against its schema. A mismatch is a defect in
    the producing code, never a user error.
    """
    schema = REPORTS[name]
    try:
        schema.validate(data)
    except typesystem.ValidationError as exc:
        raise SolverDefect(
            f"{name} report does not match its schema: {dict(exc)}"
        ) from None
    return data

"""Published JSON schemas for every CLI output and for experiment configs.

The CLI test suite validates each emitted document against these, and the
copies under ``docs/schemas/`` are asserted byte-equal to them, so the files
shipped with the repository cannot drift from the code.
"""

from __future__ import annotations

_NUMBER = {"type": "number"}
_NULLABLE_NUMBER = {"type": ["number", "null"]}
_STRING = {"type": "string"}
_INTEGER = {"type": "integer"}

DIST_SCHEMA = {
    "type": "object",
    "properties": {
        "family": {"enum": ["normal", "uniform", "exponential", "pareto"]},
        "params": {"type": "array", "items": _NUMBER},
    },
    "required": ["family", "params"],
    "additionalProperties": False,
}

MIXING_SCHEMA = {
    "type": "object",
    "properties": {"phi": _NUMBER, "innovation_sd": _NUMBER},
    "required": ["phi"],
    "additionalProperties": False,
}

M_RULE_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["match-n", "fixed", "power", "grid"]},
        "m": _INTEGER,
        "coeff": _NUMBER,
        "power": _NUMBER,
        "values": {"type": "array", "items": _INTEGER},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uvboot experiment config",
    "type": "object",
    "properties": {
        "kind": {
            "enum": [
                "clt",
                "consistency-fixed-n",
                "consistency-growing",
                "marcinkiewicz",
                "array-lln",
                "coverage",
            ]
        },
        "kernel": _STRING,
        "dist": {"oneOf": [DIST_SCHEMA, {"type": "null"}]},
        "mixing": {"oneOf": [MIXING_SCHEMA, {"type": "null"}]},
        "n": {"type": ["integer", "null"]},
        "n_grid": {"type": ["array", "null"], "items": _INTEGER},
        "m_rule": M_RULE_SCHEMA,
        "replicates": _INTEGER,
        "outer_trials": _INTEGER,
        "master_seed": _INTEGER,
        "mode": {"enum": ["joint", "conditional"]},
        "d": _NULLABLE_NUMBER,
        "normalization": {"type": ["string", "number"]},
        "target": _NULLABLE_NUMBER,
        "thresholds": {"type": "object"},
        "workers": _INTEGER,
    },
    "required": ["kind"],
    "additionalProperties": False,
}

USTAT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uvboot ustat output",
    "type": "object",
    "properties": {
        "kernel": _STRING,
        "n": _INTEGER,
        "dim": _INTEGER,
        "u": _NUMBER,
        "v": _NUMBER,
        "sigma2_hat": _NULLABLE_NUMBER,
        "jackknife_normalization": _NULLABLE_NUMBER,
        "version": _STRING,
    },
    "required": ["kernel", "n", "dim", "u", "v", "sigma2_hat", "version"],
    "additionalProperties": False,
}

_SUMMARY_SCHEMA = {
    "type": "object",
    "properties": {
        "count": _INTEGER,
        "mean": _NUMBER,
        "sd": _NUMBER,
        "min": _NUMBER,
        "q05": _NUMBER,
        "q50": _NUMBER,
        "q95": _NUMBER,
        "max": _NUMBER,
    },
    "required": ["count"],
    "additionalProperties": False,
}

BOOTSTRAP_SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uvboot bootstrap output",
    "type": "object",
    "properties": {
        "kernel": _STRING,
        "n": _INTEGER,
        "m": _INTEGER,
        "replicates": _INTEGER,
        "dropped": _INTEGER,
        "seed": _INTEGER,
        "u": _NUMBER,
        "v": _NUMBER,
        "sigma2_hat": _NUMBER,
        "u_star": _SUMMARY_SCHEMA,
        "v_star": _SUMMARY_SCHEMA,
        "q": _SUMMARY_SCHEMA,
        "pivot_u": _SUMMARY_SCHEMA,
        "pivot_v": _SUMMARY_SCHEMA,
        "version": _STRING,
    },
    "required": ["kernel", "n", "m", "replicates", "dropped", "u", "v", "sigma2_hat", "version"],
    "additionalProperties": False,
}

CI_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uvboot ci output",
    "type": "object",
    "properties": {
        "kernel": _STRING,
        "n": _INTEGER,
        "m": _INTEGER,
        "level": _NUMBER,
        "lo": _NUMBER,
        "hi": _NUMBER,
        "u": _NUMBER,
        "se": _NUMBER,
        "sigma2_hat": _NUMBER,
        "replicates_used": _INTEGER,
        "replicates_dropped": _INTEGER,
        "seed": _INTEGER,
        "version": _STRING,
    },
    "required": ["kernel", "n", "m", "level", "lo", "hi", "u", "se", "version"],
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uvboot experiment report",
    "type": "object",
    "properties": {
        "report": {
            "type": "object",
            "properties": {
                "kind": _STRING,
                "config": {"type": "object"},
                "cells": {"type": "array", "items": {"type": "object"}},
                "tests": {"type": "object"},
                "pass": {"type": ["boolean", "null"]},
            },
            "required": ["kind", "config", "cells", "tests", "pass"],
            "additionalProperties": False,
        },
        "meta": {
            "type": "object",
            "properties": {
                "runtime_seconds": _NUMBER,
                "library_version": _STRING,
            },
            "required": ["runtime_seconds", "library_version"],
            "additionalProperties": False,
        },
    },
    "required": ["report", "meta"],
    "additionalProperties": False,
}

DATAGEN_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "uvboot datagen output",
    "type": "object",
    "properties": {
        "path": _STRING,
        "n": _INTEGER,
        "dim": _INTEGER,
        "dist": _STRING,
        "seed": _INTEGER,
    },
    "required": ["path", "n", "dim", "dist", "seed"],
    "additionalProperties": False,
}

ALL_SCHEMAS = {
    "config": CONFIG_SCHEMA,
    "ustat": USTAT_SCHEMA,
    "bootstrap": BOOTSTRAP_SUMMARY_SCHEMA,
    "ci": CI_SCHEMA,
    "report": REPORT_SCHEMA,
    "datagen": DATAGEN_SCHEMA,
}

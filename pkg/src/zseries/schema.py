"""JSON schemas for series-definition files and CLI run reports."""

import jsonschema

from .errors import SeriesError

_EXPR = {"type": "object", "required": ["expr"], "properties": {"expr": {"type": "string"}},
         "additionalProperties": False}

ENVELOPE_SCHEMA = {
    "type": "object",
    "required": ["lower", "upper", "from", "direction"],
    "properties": {
        "lower": {"type": "string"},
        "upper": {"type": "string"},
        "from": {"type": "number"},
        "direction": {"enum": ["inc", "dec"]},
        # optional: the function the pair sandwiches (defaults to the magnitude)
        "function": {"type": "string"},
    },
    "additionalProperties": False,
}

SERIES_SCHEMA = {
    "type": "object",
    "required": ["start", "magnitude"],
    "properties": {
        "name": {"type": "string"},
        "start": {"type": "integer", "minimum": 0},
        "sign": {"oneOf": [{"enum": ["alternating+", "alternating-"]}, _EXPR]},
        "magnitude": {
            "oneOf": [
                _EXPR,
                {
                    "type": "object",
                    "required": ["pieces"],
                    "additionalProperties": False,
                    "properties": {
                        "pieces": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "required": ["modulus", "residue", "index", "expr"],
                                "additionalProperties": False,
                                "properties": {
                                    "modulus": {"type": "integer", "minimum": 1},
                                    "residue": {"type": "integer", "minimum": 0},
                                    "index": {"type": "string"},
                                    "expr": {"type": "string"},
                                },
                            },
                        }
                    },
                },
            ]
        },
        "envelopes": {"oneOf": [ENVELOPE_SCHEMA, {"type": "array", "items": ENVELOPE_SCHEMA}]},
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "zseries run report",
    "type": "object",
    "required": ["command", "inputs", "outputs", "warnings", "exit_code"],
    "properties": {
        "command": {"type": "array", "items": {"type": "string"}},
        "inputs": {
            "type": "object",
            "required": ["series", "precision"],
            "properties": {
                "series": {"type": "string"},
                "precision": {"type": "integer", "minimum": 64},
                "omega": {"type": ["integer", "null"]},
                "tolerance": {"type": ["string", "null"]},
                "method": {"type": ["string", "null"]},
            },
        },
        "outputs": {"type": "object"},
        "warnings": {"type": "array", "items": {"type": "string"}},
        "exit_code": {"enum": [0, 1, 2, 3]},
    },
    "additionalProperties": False,
}


def _validate(data, schema, what):
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SeriesError(f"invalid {what} at {path}: {exc.message}") from None


def validate_series_definition(data):
    _validate(data, SERIES_SCHEMA, "series definition")


def validate_report(data):
    _validate(data, REPORT_SCHEMA, "run report")

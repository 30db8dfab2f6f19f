"""
Custom rule sets loaded from JSON files.

File layout (validated with JSON Schema):

    {
      "name": "walkthrough",
      "bio": true,
      "fields": [
        {"name": "cash", "kind": "required"},
        {"name": "total"},
        {"name": "change", "kind": "optional", "aggregation": "single"}
      ],
      "rules": ["cash = total + change"]
    }

kind defaults to "mandatory", aggregation to "single". Rule grammar is
documented in rules.py and the Readme.
"""

import json
import logging

from jsonschema import validate
from jsonschema.exceptions import ValidationError

from constraints import RuleSet, make_rule_set
from errors import ConstraintError
from params import Aggregation, FieldKind
from rules import FieldSpec

log = logging.getLogger(__name__)

rule_file_schema = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "bio": {"type": "boolean"},
        "fields": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "kind": {"enum": [k.value for k in FieldKind]},
                    "aggregation": {"enum": [a.value for a in Aggregation]},
                },
                "required": ["name"],
                "additionalProperties": False,
            },
        },
        "rules": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["fields", "rules"],
    "additionalProperties": False,
}


def rule_set_from_dict(data: dict, default_name: str = "custom") -> RuleSet:
    try:
        validate(data, schema=rule_file_schema)
    except ValidationError as e:
        raise ConstraintError(f"Invalid rule file: {e.message}") from e
    specs = [
        FieldSpec(
            name=f["name"],
            kind=FieldKind(f.get("kind", FieldKind.MANDATORY.value)),
            aggregation=Aggregation(f.get("aggregation", Aggregation.SINGLE.value)),
        )
        for f in data["fields"]
    ]
    return make_rule_set(data.get("name", default_name), specs, data["rules"], bio=data.get("bio", True))


def load_rule_file(path: str) -> RuleSet:
    """
    Load a custom rule set
    :param path: JSON rule file
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConstraintError(f"Rule file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConstraintError(f"Rule file {path} is not valid JSON: {e}") from e
    rule_set = rule_set_from_dict(data)
    log.info("Loaded rule set %s with %d rules from %s", rule_set.name, len(rule_set.rules), path)
    return rule_set

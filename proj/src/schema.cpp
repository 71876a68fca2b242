#include "crtassure/io.hpp"

namespace crtassure::io {

namespace {

constexpr const char* kSchema = R"json({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "$id": "crtassure/scenario",
  "title": "Scenario",
  "type": "object",
  "additionalProperties": false,
  "required": ["design", "prior"],
  "properties": {
    "name": {"type": "string"},
    "description": {"type": "string"},
    "preset": {"type": "string", "description": "Service only: bundled preset the body is merged onto."},
    "design": {
      "type": "object",
      "additionalProperties": false,
      "required": ["delta", "clusters"],
      "properties": {
        "delta": {"type": "number", "minimum": 0, "description": "MCID in outcome units"},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 0.05},
        "sided": {"enum": ["one", "two", "one-sided", "two-sided"], "default": "two"},
        "clusters": {"type": "integer", "minimum": 2, "multipleOf": 2},
        "cluster_size": {"type": "integer", "minimum": 1},
        "draws": {"type": "integer", "minimum": 1, "default": 10000},
        "seed": {"type": "integer", "minimum": 0, "default": 20240607}
      }
    },
    "prior": {"$ref": "#/$defs/prior"},
    "point": {
      "type": "object",
      "additionalProperties": false,
      "required": ["sigma", "rho", "nu"],
      "properties": {
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "rho": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "nu": {"type": "number", "minimum": 0}
      }
    },
    "search": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "mode": {"enum": ["power", "assurance"], "default": "assurance"},
        "target": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 0.8},
        "direction": {"enum": ["cluster_size", "n_bar", "clusters"], "default": "cluster_size"},
        "n_max": {"type": "integer", "minimum": 1, "default": 10000},
        "c_max": {"type": "integer", "minimum": 2, "default": 10000},
        "cluster_sizes": {"$ref": "#/$defs/numbers"}
      }
    },
    "sweep": {
      "type": "object",
      "additionalProperties": false,
      "required": ["nu_values"],
      "properties": {"nu_values": {"$ref": "#/$defs/numbers"}}
    },
    "compare": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "clusters": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 2, "multipleOf": 2}},
        "scenarios": {
          "type": "array",
          "minItems": 1,
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["label", "prior"],
            "properties": {"label": {"type": "string"}, "prior": {"$ref": "#/$defs/prior"}}
          }
        }
      }
    },
    "validation": {
      "type": "object",
      "additionalProperties": false,
      "properties": {"reps": {"type": "integer", "minimum": 100, "default": 10000}}
    },
    "outputs": {"type": "array", "items": {"type": "string", "pattern": "\\.(json|csv)$"}}
  },
  "$defs": {
    "numbers": {
      "oneOf": [
        {"type": "array", "minItems": 1, "items": {"type": "number"}},
        {"type": "string", "description": "start:stop:step (inclusive) or comma-separated list"}
      ]
    },
    "gamma": {
      "oneOf": [
        {"type": "object", "additionalProperties": false, "required": ["shape", "rate"],
         "properties": {"shape": {"type": "number", "exclusiveMinimum": 0}, "rate": {"type": "number", "exclusiveMinimum": 0}}},
        {"type": "object", "additionalProperties": false, "required": ["mean", "variance"],
         "properties": {"mean": {"type": "number", "exclusiveMinimum": 0}, "variance": {"type": "number", "exclusiveMinimum": 0}}}
      ]
    },
    "marginal": {
      "oneOf": [
        {"type": "number"},
        {"type": "object", "additionalProperties": false, "required": ["point"], "properties": {"point": {"type": "number"}}},
        {"type": "object", "additionalProperties": false, "required": ["gamma"], "properties": {"gamma": {"$ref": "#/$defs/gamma"}}},
        {"type": "object", "additionalProperties": false, "required": ["logit_normal"],
         "properties": {"logit_normal": {"oneOf": [
           {"type": "object", "additionalProperties": false, "required": ["mu", "sigma_logit"],
            "properties": {"mu": {"type": "number"}, "sigma_logit": {"type": "number", "exclusiveMinimum": 0}}},
           {"type": "object", "additionalProperties": false, "required": ["median", "lo95", "hi95"],
            "properties": {"median": {"type": "number"}, "lo95": {"type": "number"}, "hi95": {"type": "number"},
                           "spread_scale": {"type": "number", "exclusiveMinimum": 0}}}
         ]}}},
        {"type": "object", "additionalProperties": false, "required": ["samples"],
         "properties": {"samples": {"type": "array", "minItems": 1, "items": {"type": "number"}}}},
        {"type": "object", "additionalProperties": false, "required": ["samples_file"],
         "properties": {"samples_file": {"type": "string"}}}
      ]
    },
    "prior": {
      "type": "object",
      "additionalProperties": false,
      "required": ["nu"],
      "properties": {
        "joint": {"enum": ["independent", "copula", "induced"], "default": "independent"},
        "sigma": {"$ref": "#/$defs/marginal"},
        "rho": {"$ref": "#/$defs/marginal"},
        "nu": {"$ref": "#/$defs/marginal"},
        "copula": {
          "type": "object",
          "additionalProperties": false,
          "required": ["gamma"],
          "properties": {
            "gamma": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
            "sigma_quantile": {"enum": ["marginal", "gamma", "normal"], "default": "marginal"}
          }
        },
        "induced": {
          "type": "object",
          "additionalProperties": false,
          "required": ["sigma_b_sq", "sigma_w_sq"],
          "properties": {"sigma_b_sq": {"$ref": "#/$defs/gamma"}, "sigma_w_sq": {"$ref": "#/$defs/gamma"}}
        }
      }
    }
  }
})json";

}  // namespace

const json& scenario_schema() {
    static const json schema = json::parse(kSchema);
    return schema;
}

}  // namespace crtassure::io

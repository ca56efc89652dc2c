"""Experiment configuration: line-oriented key = value files.

The format is deliberately dumb: UTF-8 text, one `key = value` per
line, `#` starts a comment, the `variant` key selects a model whose
parameters are further keys in the same file. Parsing collects every
violated constraint (with its line number where one exists) instead of
stopping at the first.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Optional

from . import models as model_zoo

KINDS = ("simulate", "couple", "invariant-check", "moments", "lyapunov",
         "stability", "gcurve", "eigen")


class ConfigError(ValueError):
    """Carries every violated constraint found while parsing."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid config:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    out_prefix: str
    model: object = None
    samples: int = 1000
    horizon: Optional[float] = None
    times: tuple = ()
    x0: float = 0.0
    mode0: int = 0
    x: Optional[float] = None
    y: Optional[float] = None
    coupling: str = "tv"
    orders: tuple = (1, 2)
    alpha: Optional[float] = None
    r: Optional[float] = None
    alpha_grid: tuple = ()
    r_grid: tuple = ()
    burn_in: float = 50.0
    spacing: float = 4.0
    n_max: int = 8
    mc: bool = True
    ks_tol: float = 0.02
    text: str = ""  # original source, used to rebuild configs in workers


def _parse_float(v):
    return float(v)


def _parse_int(v):
    f = float(v)
    if f != int(f):
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


def _parse_grid(v):
    parts = [p.strip() for p in v.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty grid")
    vals = tuple(float(p) for p in parts)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("grid values must be strictly increasing")
    return vals


def _parse_int_list(v):
    return tuple(_parse_int(p) for p in v.split(",") if p.strip())


def _parse_bool(v):
    low = v.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _parse_str(v):
    return v


# key -> (parser, constraint predicate or None, constraint description)
_OPTION_KEYS = {
    "kind": (_parse_str, lambda v: v in KINDS, f"kind must be one of {KINDS}"),
    "seed": (_parse_int, None, None),
    "out_prefix": (_parse_str, None, None),
    "samples": (_parse_int, lambda v: v >= 1, "samples must be >= 1"),
    "horizon": (_parse_float, lambda v: v > 0, "horizon must be > 0"),
    "times": (_parse_grid, lambda v: all(x > 0 for x in v), "times must be positive"),
    "x0": (_parse_float, None, None),
    "mode0": (_parse_int, lambda v: v >= 0, "mode0 must be >= 0"),
    "x": (_parse_float, None, None),
    "y": (_parse_float, None, None),
    "coupling": (_parse_str, lambda v: v in ("tv", "shared"),
                 "coupling must be 'tv' or 'shared'"),
    "orders": (_parse_int_list, lambda v: all(n >= 0 for n in v),
               "orders must be nonnegative integers"),
    "alpha": (_parse_float, lambda v: v > 0, "alpha must be > 0"),
    "r": (_parse_float, lambda v: v > 0, "r must be > 0"),
    "alpha_grid": (_parse_grid, lambda v: all(x > 0 for x in v),
                   "alpha_grid must be positive"),
    "r_grid": (_parse_grid, lambda v: all(x > 0 for x in v), "r_grid must be positive"),
    "burn_in": (_parse_float, lambda v: v >= 0, "burn_in must be >= 0"),
    "spacing": (_parse_float, lambda v: v > 0, "spacing must be > 0"),
    "n_max": (_parse_int, lambda v: v >= 0, "n_max must be >= 0"),
    "mc": (_parse_bool, None, None),
    "ks_tol": (_parse_float, lambda v: v > 0, "ks_tol must be > 0"),
}

# per-kind required and permitted option keys (variant params come extra)
_ALWAYS = ("kind", "seed", "out_prefix")
_KIND_KEYS = {
    "simulate": (("variant", "horizon", "samples"), ("times", "x0", "mode0")),
    "couple": (("variant", "samples", "x", "y"), ("times", "horizon", "coupling")),
    "invariant-check": (("variant", "samples"),
                        ("horizon", "burn_in", "spacing", "x0", "mode0", "ks_tol")),
    "moments": (("variant", "samples", "times", "orders"), ("x0",)),
    "lyapunov": (("alpha",), ("r", "r_grid", "horizon", "mc")),
    "stability": (("alpha_grid",), ()),
    "gcurve": (("r_grid",), ()),
    "eigen": (("n_max",), ()),
}

_MODEL_KINDS = ("simulate", "couple", "invariant-check", "moments")

# config key name per model field; identical except the tcp rate,
# which is written `lambda` in configs but `lam` in Python
_FIELD_ALIASES = {"lam": "lambda"}


def _model_keys(spec_cls):
    out = {}
    for f in fields(spec_cls):
        if f.name.endswith("_fn"):
            continue  # callable fields have no config form
        out[_FIELD_ALIASES.get(f.name, f.name)] = f.name
    return out


def model_config_lines(spec) -> list:
    """Canonical `key = value` serialization of a model spec."""
    lines = [f"variant = {spec.tag}"]
    for key, fname in _model_keys(type(spec)).items():
        val = getattr(spec, fname)
        if val is None:
            continue
        if isinstance(val, str):
            lines.append(f"{key} = {val}")
        elif isinstance(val, int) and not isinstance(val, bool):
            lines.append(f"{key} = {val}")
        else:
            lines.append(f"{key} = {format(float(val), '.17g')}")
    return lines


def _parse_lines(text):
    """(entries, errors): entries maps key -> (value, line_number)."""
    entries = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected `key = value`, got {raw.strip()!r}")
            continue
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key in entries:
            errors.append(f"line {lineno}: duplicate key `{key}`")
            continue
        entries[key] = (value, lineno)
    return entries, errors


def parse_config(text: str) -> ExperimentConfig:
    """Validated ExperimentConfig, or ConfigError listing every violation."""
    entries, errors = _parse_lines(text)

    kind = None
    if "kind" not in entries:
        errors.append("missing required key `kind`")
    else:
        raw, lineno = entries["kind"]
        if raw not in KINDS:
            errors.append(f"line {lineno}: kind must be one of {KINDS}, got {raw!r}")
        else:
            kind = raw

    known = set(_ALWAYS)
    required = set()
    model_key_map = {}
    variant_cls = None
    if kind is not None:
        req, opt = _KIND_KEYS[kind]
        required = {k for k in req if k != "variant"}
        known |= set(req) | set(opt)
        if "variant" in req:
            if "variant" not in entries:
                errors.append("missing required key `variant`")
            else:
                tag, lineno = entries["variant"]
                variant_cls = model_zoo.SPEC_TYPES.get(tag)
                if variant_cls is None:
                    errors.append(
                        f"line {lineno}: unknown variant {tag!r}; known: "
                        f"{sorted(model_zoo.SPEC_TYPES)}")
                else:
                    model_key_map = _model_keys(variant_cls)
                    known |= set(model_key_map)

    for key in ("seed",):
        if key not in entries:
            errors.append(f"missing required key `{key}`")
    for key in sorted(required):
        if key not in entries:
            errors.append(f"missing required key `{key}`")

    for key, (value, lineno) in entries.items():
        if key == "variant":
            continue
        if key not in known and key not in _OPTION_KEYS:
            errors.append(f"line {lineno}: unknown key `{key}`")
        elif kind is not None and key not in known:
            errors.append(f"line {lineno}: key `{key}` does not apply to kind={kind}")

    options = {}
    for key, (value, lineno) in entries.items():
        if key in ("variant",) or key in model_key_map:
            continue
        if key not in _OPTION_KEYS or key not in known:
            continue
        parser, check, msg = _OPTION_KEYS[key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            errors.append(f"line {lineno}: key `{key}`: {exc}")
            continue
        if check is not None and not check(parsed):
            errors.append(f"line {lineno}: key `{key}`: {msg}")
            continue
        options[key] = parsed

    model = None
    if variant_cls is not None:
        kwargs = {}
        missing = []
        param_errors = False
        for key, fname in model_key_map.items():
            if key not in entries:
                missing.append((key, fname))
                continue
            value, lineno = entries[key]
            try:
                if fname == "K":
                    kwargs[fname] = _parse_int(value)
                elif fname in ("rate_kind", "nu_kind"):
                    kwargs[fname] = value
                else:
                    kwargs[fname] = float(value)
            except ValueError as exc:
                errors.append(f"line {lineno}: key `{key}`: {exc}")
                param_errors = True
        optional_model_fields = {"rate_kind", "rate_value", "nu_kind", "nu_value"}
        hard_missing = [k for k, f in missing if f not in optional_model_fields]
        if hard_missing:
            errors.append(
                f"variant {variant_cls.tag!r} missing required keys: "
                + ", ".join(f"`{k}`" for k in sorted(hard_missing)))
        elif not param_errors:
            try:
                model = variant_cls(**kwargs)
            except (TypeError, ValueError) as exc:
                lineno = entries["variant"][1]
                errors.append(f"line {lineno}: {exc}")

    if errors:
        raise ConfigError(errors)

    options.pop("kind", None)
    out_prefix = options.pop("out_prefix", kind)
    cfg = ExperimentConfig(kind=kind, seed=options.pop("seed"),
                           out_prefix=out_prefix, model=model, text=text,
                           **options)
    if cfg.kind == "lyapunov" and cfg.r is None and not cfg.r_grid:
        raise ConfigError(["kind=lyapunov needs `r` or `r_grid`"])
    if cfg.kind == "couple" and cfg.horizon is None and not cfg.times:
        raise ConfigError(["kind=couple needs `times` or `horizon`"])
    if cfg.kind == "moments" and cfg.model is not None and cfg.model.tag != "tcp":
        raise ConfigError(["kind=moments supports variant tcp"])
    return cfg


def override_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    """Config with the seed replaced, keeping text round-trips coherent."""
    lines = []
    replaced = False
    for raw in config.text.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped.startswith("seed") and "=" in stripped \
                and stripped.split("=", 1)[0].strip() == "seed":
            lines.append(f"seed = {int(seed)}")
            replaced = True
        else:
            lines.append(raw)
    if not replaced:
        lines.append(f"seed = {int(seed)}")
    return replace(config, seed=int(seed), text="\n".join(lines))

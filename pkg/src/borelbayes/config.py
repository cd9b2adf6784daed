"""Flat key-value run configuration for the CLI.

The format is one ``key = value`` pair per line with ``#`` comments and
dotted keys for the prior block; command-line flags override file values.
Example::

    r = 3
    n = 100,500
    reps = 10
    seed = 1
    grid_m = 2000
    tail_eps = 1e-12
    qzero_convention = one
    prior.kind = uniform
    prior.a = 0.5
    prior.b = 0.8
"""

from .empirical import QZERO_CONVENTIONS
from .priors import Prior
from .risk import ExperimentConfig


class UsageError(Exception):
    """Bad flags or configuration; maps to CLI exit code 1."""


#: The shipped defaults reproduce the numerical study: three ancestors, a
#: uniform(0.5, 0.8) prior, history sizes 100 and 500, ten replications.
STUDY_DEFAULTS = {
    "r": "3",
    "n": "100,500",
    "reps": "10",
    "seed": "1",
    "grid_m": "2000",
    "tail_eps": "1e-12",
    "qzero_convention": "one",
    "prior.kind": "uniform",
    "prior.a": "0.5",
    "prior.b": "0.8",
}

_KNOWN_KEYS = set(STUDY_DEFAULTS) | {"prior.v", "prior.w", "prior.thetas", "prior.weights"}


def parse_config_text(text, source="<config>"):
    """Parse the flat key-value format into a string-to-string mapping."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise UsageError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def _get_float(mapping, key):
    try:
        return float(mapping[key])
    except KeyError:
        raise UsageError(f"missing config key {key!r}")
    except ValueError:
        raise UsageError(f"config key {key!r} must be a number, got {mapping[key]!r}")


def _get_int(mapping, key):
    try:
        return int(mapping[key])
    except KeyError:
        raise UsageError(f"missing config key {key!r}")
    except ValueError:
        raise UsageError(f"config key {key!r} must be an integer, got {mapping[key]!r}")


def _get_float_list(mapping, key):
    try:
        return [float(part) for part in mapping[key].split(",") if part.strip()]
    except KeyError:
        raise UsageError(f"missing config key {key!r}")
    except ValueError:
        raise UsageError(f"config key {key!r} must be comma-separated numbers")


def build_prior(mapping):
    """Construct the prior described by the ``prior.*`` keys."""
    kind = mapping.get("prior.kind", "uniform")
    try:
        if kind == "uniform":
            return Prior.uniform(_get_float(mapping, "prior.a"), _get_float(mapping, "prior.b"))
        if kind == "beta":
            return Prior.beta(_get_float(mapping, "prior.v"), _get_float(mapping, "prior.w"))
        if kind == "grid":
            return Prior.grid(
                _get_float_list(mapping, "prior.thetas"),
                _get_float_list(mapping, "prior.weights"),
            )
    except ValueError as exc:
        raise UsageError(f"invalid prior: {exc}") from exc
    raise UsageError(f"unknown prior kind {kind!r}")


def history_sizes(mapping):
    """The list of history sizes n named by the configuration."""
    sizes = []
    for part in mapping.get("n", STUDY_DEFAULTS["n"]).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            sizes.append(int(part))
        except ValueError:
            raise UsageError(f"history sizes must be integers, got {part!r}")
    if not sizes:
        raise UsageError("configuration names no history sizes")
    return sizes


def build_experiment_config(mapping, n):
    """An ExperimentConfig for one history size from a resolved mapping."""
    qzero = mapping.get("qzero_convention", "one")
    if qzero not in QZERO_CONVENTIONS:
        raise UsageError(f"qzero_convention must be one of {QZERO_CONVENTIONS}, got {qzero!r}")
    try:
        return ExperimentConfig(
            r=_get_int(mapping, "r"),
            prior=build_prior(mapping),
            n=int(n),
            reps=_get_int(mapping, "reps"),
            seed=_get_int(mapping, "seed"),
            grid_m=_get_int(mapping, "grid_m"),
            tail_eps=_get_float(mapping, "tail_eps"),
            qzero=qzero,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def resolve(mapping=None, overrides=None, defaults=None):
    """Defaults, then file values, then flag overrides; later wins."""
    merged = dict(defaults or STUDY_DEFAULTS)
    merged.update(mapping or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return merged


def describe(mapping):
    """One-line canonical rendering of a resolved configuration."""
    return " ".join(f"{key}={mapping[key]}" for key in sorted(mapping))

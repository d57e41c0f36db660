"""``key=value`` text format for :class:`ConstellationConfig`.

One assignment per line, ``#`` starts a comment, blank lines are ignored.
Omitted keys take the defaults of the reference parameter set::

    L=10
    lambda=10.0
    alpha=0.7
    beta=0.3
    c=16
    policy=mqla            # no-isl | virtual | mqla
    slots=110000
    warmup=10000
    seed=0
    tau=10,15,20           # tracked thresholds, ascending
    qmax=none              # buffer capacity; set -> drop-on-full
    measure=pre            # pre | post (relative to reallocation)
    initial_channel=stationary
"""

from __future__ import annotations

import math

from .allocation import PolicyKind
from .errors import ConfigError
from .sim import ConstellationConfig, MeasureEpoch
from .stochastic import GilbertElliottParams, PoissonArrivalParams

KEYS = (
    "L", "lambda", "alpha", "beta", "c", "policy", "slots", "warmup",
    "seed", "tau", "qmax", "measure", "initial_channel",
)


def _int(key, text, lo=None):
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", key=key) from None
    if lo is not None and value < lo:
        raise ConfigError(f"must be >= {lo}, got {value}", key=key)
    return value


def _float(key, text, lo=None, hi=None):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", key=key) from None
    if not math.isfinite(value):
        raise ConfigError("must be finite", key=key)
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise ConfigError(f"must lie in [{lo}, {hi}], got {value}", key=key)
    return value


def _choice(key, text, enum_cls):
    try:
        return enum_cls(text)
    except ValueError:
        options = ", ".join(m.value for m in enum_cls)
        raise ConfigError(f"expected one of {options}, got {text!r}", key=key) from None


def parse_value(key: str, text: str):
    """Convert the text of one key into its typed value."""
    text = text.strip()
    if key == "L":
        return _int(key, text, lo=1)
    if key == "lambda":
        return _float(key, text, lo=0.0)
    if key in ("alpha", "beta"):
        return _float(key, text, lo=0.0, hi=1.0)
    if key == "c":
        return _int(key, text, lo=1)
    if key == "policy":
        return _choice(key, text, PolicyKind)
    if key in ("slots",):
        return _int(key, text, lo=1)
    if key in ("warmup",):
        return _int(key, text, lo=0)
    if key == "seed":
        value = _int(key, text, lo=0)
        if value >= 2**64:
            raise ConfigError("must fit in 64 bits", key=key)
        return value
    if key == "tau":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if not parts:
            raise ConfigError("needs at least one threshold", key=key)
        values = tuple(_int(key, p, lo=0) for p in parts)
        if list(values) != sorted(set(values)):
            raise ConfigError("thresholds must be strictly ascending", key=key)
        return values
    if key == "qmax":
        return None if text.lower() == "none" else _int(key, text, lo=1)
    if key == "measure":
        return _choice(key, text, MeasureEpoch)
    if key == "initial_channel":
        if text not in ("stationary", "good", "bad"):
            raise ConfigError(f"expected stationary, good or bad, got {text!r}", key=key)
        return text
    raise ConfigError("unknown key", key=key)


def build_config(values: dict, base: ConstellationConfig | None = None) -> ConstellationConfig:
    """Overlay typed ``values`` (keyed as in the text format) on ``base``."""
    base = base or ConstellationConfig()
    unknown = set(values) - set(KEYS)
    if unknown:
        raise ConfigError("unknown key", key=sorted(unknown)[0])
    get = values.get
    try:
        ch = GilbertElliottParams(
            get("alpha", base.ch.alpha), get("beta", base.ch.beta), get("c", base.ch.c)
        )
        arr = PoissonArrivalParams(get("lambda", base.arr.lam))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ConstellationConfig(
        L=get("L", base.L),
        arr=arr,
        ch=ch,
        policy=get("policy", base.policy),
        slots=get("slots", base.slots),
        warmup_slots=get("warmup", base.warmup_slots),
        seed=get("seed", base.seed),
        thresholds=get("tau", base.thresholds),
        q_max=get("qmax", base.q_max),
        measure_epoch=get("measure", base.measure_epoch),
        initial_channel=get("initial_channel", base.initial_channel),
    )


def parse_assignments(text: str) -> dict:
    """Typed values of every assignment in ``text``; errors carry line numbers."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        try:
            values[key] = parse_value(key, value)
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], key=key, line=lineno) from None
    return values


def parse_config(text: str, base: ConstellationConfig | None = None) -> ConstellationConfig:
    return build_config(parse_assignments(text), base)


def serialize_config(config: ConstellationConfig) -> str:
    """Canonical text: every key, fixed order, shortest round-trip floats."""
    rows = [
        ("L", str(config.L)),
        ("lambda", repr(float(config.arr.lam))),
        ("alpha", repr(float(config.ch.alpha))),
        ("beta", repr(float(config.ch.beta))),
        ("c", str(config.ch.c)),
        ("policy", config.policy.value),
        ("slots", str(config.slots)),
        ("warmup", str(config.warmup_slots)),
        ("seed", str(config.seed)),
        ("tau", ",".join(str(t) for t in config.thresholds)),
        ("qmax", "none" if config.q_max is None else str(config.q_max)),
        ("measure", config.measure_epoch.value),
        ("initial_channel", config.initial_channel),
    ]
    return "".join(f"{k}={v}\n" for k, v in rows)


def normalize_config_text(text: str) -> str:
    return serialize_config(parse_config(text))

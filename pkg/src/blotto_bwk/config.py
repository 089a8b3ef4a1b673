"""Experiment specification: parsing and validation of JSON configs and flags."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import ConfigError, InvalidInputError
from .game import GameConfig, adversary_from_dict

GAME_KEYS = {"n", "T", "B", "c", "weights"}
SPEC_KEYS = GAME_KEYS | {
    "adversary",
    "seeds",
    "horizons",
    "master_seed",
    "output",
    "emit_rounds",
    "emit_oracles",
    "mc_samples",
    "n_jobs",
}
ADVERSARY_KEYS = {
    "FixedAllocation": {"type", "allocation"},
    "Categorical": {"type", "allocations", "probabilities"},
    "UniformSum": {"type", "total"},
    "IndependentBinomial": {"type", "trials", "p"},
}
_SHORTHAND = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


@dataclass
class ExperimentSpec:
    """A validated experiment: one game, one adversary, seeds x horizons.

    When ``horizons`` differs from ``[game.T]`` each horizon ``T'`` is played
    with budget ``floor(B * T' / T)`` so that ``B / T`` (hence ``m``) is kept.
    """

    game: GameConfig
    adversary: dict
    seeds: list = field(default_factory=lambda: [0])
    horizons: list | None = None
    master_seed: int = 0
    output: str = "results"
    emit_rounds: bool = True
    emit_oracles: bool = True
    mc_samples: int = 100_000
    n_jobs: int = 1

    def __post_init__(self):
        if self.horizons is None:
            self.horizons = [self.game.T]
        for T in self.horizons:
            self.game_for(T)
        self.adversary_model()

    def game_for(self, T):
        g = self.game
        if T == g.T:
            return g
        try:
            return GameConfig(g.n, T, g.B * T // g.T, g.c, g.weights)
        except InvalidInputError as exc:
            raise ConfigError(str(exc), "horizons") from exc

    def adversary_model(self):
        try:
            return adversary_from_dict(self.adversary, self.game.n)
        except (InvalidInputError, KeyError, TypeError) as exc:
            raise ConfigError(str(exc), "adversary") from exc

    def episode_seed(self, T, seed):
        return [self.master_seed, T, seed]

    def to_dict(self):
        return {
            "game": self.game.to_dict(),
            "adversary": self.adversary,
            "seeds": list(self.seeds),
            "horizons": list(self.horizons),
            "master_seed": self.master_seed,
            "emit_rounds": self.emit_rounds,
            "emit_oracles": self.emit_oracles,
            "mc_samples": self.mc_samples,
        }


def parse_adversary(value):
    """Accept the dict form or a shorthand such as ``"UniformSum(4)"``."""
    if isinstance(value, dict):
        kind = value.get("type")
        if kind not in ADVERSARY_KEYS:
            raise ConfigError(f"unknown adversary type {kind!r}", "adversary.type")
        for key in value:
            if key not in ADVERSARY_KEYS[kind]:
                raise ConfigError("unknown key", f"adversary.{key}")
        for key in ADVERSARY_KEYS[kind] - set(value):
            raise ConfigError("missing required field", f"adversary.{key}")
        return dict(value)
    if isinstance(value, str):
        match = _SHORTHAND.match(value)
        if not match:
            raise ConfigError(f"cannot parse adversary {value!r}", "adversary")
        kind, args = match.group(1), match.group(2)
        nums = [int(a) for a in re.findall(r"-?\d+", args)]
        if kind == "UniformSum" and len(nums) == 1:
            return {"type": "UniformSum", "total": nums[0]}
        if kind in ("FixedAllocation", "Fixed") and nums:
            return {"type": "FixedAllocation", "allocation": nums}
        raise ConfigError(f"unsupported adversary shorthand {value!r}", "adversary")
    raise ConfigError("must be an object or a shorthand string", "adversary")


def _require_int_list(raw, key):
    value = raw[key]
    if not isinstance(value, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in value):
        raise ConfigError("must be a list of integers", key)
    if not value:
        raise ConfigError("must not be empty", key)
    return value


def build_spec(raw):
    """Validate a plain mapping into an :class:`ExperimentSpec`."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    for key in raw:
        if key not in SPEC_KEYS:
            raise ConfigError("unknown key", key)
    for key in ("n", "T", "B", "c", "adversary"):
        if key not in raw:
            raise ConfigError("missing required field", key)
    try:
        game = GameConfig(raw["n"], raw["T"], raw["B"], raw["c"], raw.get("weights"))
    except InvalidInputError as exc:
        msg = str(exc)
        field_name = next((k for k in ("weights", "n", "T", "B", "c") if msg.startswith(k)), "game")
        raise ConfigError(msg, field_name) from exc
    kwargs = {}
    if "seeds" in raw:
        kwargs["seeds"] = _require_int_list(raw, "seeds")
    if "horizons" in raw:
        kwargs["horizons"] = _require_int_list(raw, "horizons")
    for key in ("master_seed", "mc_samples", "n_jobs"):
        if key in raw:
            if not isinstance(raw[key], int) or isinstance(raw[key], bool):
                raise ConfigError("must be an integer", key)
            kwargs[key] = raw[key]
    for key in ("emit_rounds", "emit_oracles"):
        if key in raw:
            if not isinstance(raw[key], bool):
                raise ConfigError("must be a boolean", key)
            kwargs[key] = raw[key]
    if "output" in raw:
        kwargs["output"] = str(raw["output"])
    return ExperimentSpec(game=game, adversary=parse_adversary(raw["adversary"]), **kwargs)


def load_raw(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc


def parse_config(path=None, overrides=None):
    """Build a spec from a JSON file, a flag mapping, or both (flags win)."""
    raw = load_raw(path) if path is not None else {}
    if overrides:
        raw = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    return build_spec(raw)

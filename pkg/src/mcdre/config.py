"""Run configuration: a flat ``key = value`` text format, fail-fast.

Unknown keys are errors.  Comments start with ``#``; blank lines are
ignored.  ``to_text()`` writes keys in a fixed order so two identical
configs serialize byte-identically (the checkpoint embeds this snapshot).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .cross import ASPECT_ORDER, CrossMode
from .errors import ConfigError

_CROSS_MODES = {m.value for m in CrossMode}
_SCHEMES = ("bio", "biohd")
_CROSS_LAYER_CHOICES = ("all", "last")


@dataclass
class RunConfig:
    d_model: int = 128
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int | None = None  # defaults to 2 * d_model
    dropout: float = 0.5
    lr: float = 4e-4
    batch_size: int = 32
    seed: int = 0
    cross_mode: str = "kv"
    active_aspects: tuple[str, ...] = ("se", "sy", "do")
    cross_layers: str = "all"
    include_own: bool = False
    scheme: str = "biohd"
    embedding: str = "trainable"  # or "external:<path>"
    patience: int = 10
    max_epochs: int = 300
    loss_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    clip_norm: float | None = 10.0

    def __post_init__(self):
        self.validate()

    @property
    def ffn_dim(self) -> int:
        return self.d_ff if self.d_ff is not None else 2 * self.d_model

    @property
    def mode(self) -> CrossMode:
        return CrossMode(self.cross_mode)

    def validate(self) -> None:
        if self.d_model < 1 or self.n_heads < 1 or self.n_layers < 1:
            raise ConfigError("d_model, n_heads and n_layers must be positive")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(f"n_heads={self.n_heads} must divide d_model={self.d_model}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.cross_mode not in _CROSS_MODES:
            raise ConfigError(f"cross_mode must be one of {sorted(_CROSS_MODES)}, got {self.cross_mode!r}")
        aspects = tuple(self.active_aspects)
        if "se" not in aspects:
            raise ConfigError("active_aspects must contain 'se'")
        unknown = set(aspects) - set(ASPECT_ORDER)
        if unknown:
            raise ConfigError(f"unknown aspects {sorted(unknown)}; valid: {ASPECT_ORDER}")
        if len(set(aspects)) != len(aspects):
            raise ConfigError("active_aspects has duplicates")
        self.active_aspects = tuple(a for a in ASPECT_ORDER if a in aspects)
        if self.cross_layers not in _CROSS_LAYER_CHOICES:
            raise ConfigError(f"cross_layers must be one of {_CROSS_LAYER_CHOICES}")
        if self.scheme not in _SCHEMES:
            raise ConfigError(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")
        if not (self.embedding == "trainable" or self.embedding.startswith("external:")):
            raise ConfigError("embedding must be 'trainable' or 'external:<path>'")
        if self.patience < 1 or self.max_epochs < 1:
            raise ConfigError("patience and max_epochs must be >= 1")
        if len(self.loss_weights) != 3:
            raise ConfigError("loss_weights needs exactly three values (se, sy, do)")
        self.loss_weights = tuple(float(w) for w in self.loss_weights)
        if self.d_ff is not None and self.d_ff < 1:
            raise ConfigError("d_ff must be >= 1")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise ConfigError("clip_norm must be > 0 or none")

    def copy(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    # -- text round-trip ----------------------------------------------------

    _KEYS = (
        "d_model", "n_heads", "n_layers", "d_ff", "dropout", "lr", "batch_size",
        "seed", "cross_mode", "active_aspects", "cross_layers", "include_own",
        "scheme", "embedding", "patience", "max_epochs", "loss_weights", "clip_norm",
    )

    def to_text(self) -> str:
        lines = []
        for key in self._KEYS:
            value = getattr(self, key)
            if key == "active_aspects":
                value = ",".join(value)
            elif key == "loss_weights":
                value = ",".join(repr(w) for w in value)
            elif key == "include_own":
                value = "true" if value else "false"
            elif value is None:
                value = "none"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "RunConfig":
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in cls._KEYS:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            values[key] = _parse_value(key, value, f"{source}:{lineno}")
        try:
            return cls(**values)
        except ConfigError as err:
            raise ConfigError(f"{source}: {err}") from None

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), source=str(path))


def _parse_value(key: str, value: str, where: str):
    try:
        if key in ("d_model", "n_heads", "n_layers", "batch_size", "seed", "patience", "max_epochs"):
            return int(value)
        if key == "d_ff":
            return None if value.lower() == "none" else int(value)
        if key in ("dropout", "lr"):
            return float(value)
        if key == "clip_norm":
            return None if value.lower() == "none" else float(value)
        if key == "include_own":
            if value.lower() in ("true", "false"):
                return value.lower() == "true"
            raise ValueError("expected true or false")
        if key == "active_aspects":
            return tuple(part.strip() for part in value.split(",") if part.strip())
        if key == "loss_weights":
            return tuple(float(part) for part in value.split(","))
        return value
    except ValueError as err:
        raise ConfigError(f"{where}: bad value for {key!r}: {err}") from None

"""Flat ``key = value`` run configuration with command-line overrides."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

OPTIMIZERS = ("adas", "fixed", "step")
DATASETS = ("synthetic", "idx")
_PATH_KEYS = ("train_images", "train_labels", "test_images", "test_labels")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(" ", "").split(",") if v)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    optimizer: str = "adas"
    beta: float = 0.8
    zeta: float = 1.0
    eta_init: float = 0.06
    eta_min: float = 1e-5
    momentum: float = 0.9
    step_factor: float = 0.5
    step_period: int = 25
    epochs: int = 20
    batch_size: int = 128
    seed: int = 0
    dataset: str = "synthetic"
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    synthetic_train: int = 8000
    synthetic_test: int = 2000
    synthetic_size: int = 16
    synthetic_noise: float = 0.35
    synthetic_jitter: float = 1.5
    data_seed: int = 1
    classes: int = 10
    conv_channels: tuple[int, ...] = (8, 16, 32)
    pool: tuple[bool, ...] = (True, True, False)
    output: str = "runs/default"
    snapshots: bool = False

    def validate(self) -> "RunConfig":
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError("optimizer", f"must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if not 0.0 <= self.beta < 1.0:
            raise ConfigError("beta", f"must lie in [0, 1), got {self.beta}")
        if self.zeta < 0:
            raise ConfigError("zeta", f"must be >= 0, got {self.zeta}")
        for key in ("eta_init", "eta_min"):
            if not getattr(self, key) > 0:
                raise ConfigError(key, f"must be positive, got {getattr(self, key)}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum", f"must lie in [0, 1), got {self.momentum}")
        if not 0.0 < self.step_factor <= 1.0:
            raise ConfigError("step_factor", f"must lie in (0, 1], got {self.step_factor}")
        for key in ("step_period", "epochs", "batch_size", "synthetic_train", "synthetic_test", "synthetic_size"):
            if getattr(self, key) < 1:
                raise ConfigError(key, f"must be >= 1, got {getattr(self, key)}")
        if self.classes < 2:
            raise ConfigError("classes", f"must be >= 2, got {self.classes}")
        if not self.conv_channels or min(self.conv_channels) < 1:
            raise ConfigError("conv_channels", "need at least one positive channel count")
        if len(self.pool) != len(self.conv_channels):
            raise ConfigError("pool", "needs one flag per conv block")
        if self.dataset not in DATASETS:
            raise ConfigError("dataset", f"must be one of {DATASETS}, got {self.dataset!r}")
        if self.dataset == "idx":
            for key in _PATH_KEYS:
                path = getattr(self, key)
                if not path or not Path(path).is_file():
                    raise ConfigError(key, f"file not found: {path!r}")
        return self


def _convert(field: dataclasses.Field, raw: str):
    default = field.default
    try:
        if field.name == "pool":
            return tuple(_bool(v) for v in raw.replace(" ", "").split(",") if v)
        if field.name == "conv_channels":
            return _int_tuple(raw)
        if isinstance(default, bool):
            return _bool(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(field.name, f"cannot parse {raw!r} ({exc})") from None


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def parse_pairs(pairs: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    values = {}
    for key, raw in pairs.items():
        if key not in FIELDS:
            raise ConfigError(key, "unknown key")
        values[key] = _convert(FIELDS[key], raw)
    return dataclasses.replace(base or RunConfig(), **values)


def read_config_text(text: str) -> dict[str, str]:
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        pairs[key] = value
    return pairs


def load_config(path=None, overrides: dict[str, str] | None = None) -> RunConfig:
    """File values first, then overrides; validated."""
    pairs = read_config_text(Path(path).read_text()) if path else {}
    cfg = parse_pairs(pairs)
    if overrides:
        cfg = parse_pairs(overrides, cfg)
    return cfg.validate()


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for name in FIELDS:
        value = getattr(cfg, name)
        if isinstance(value, tuple):
            value = ",".join(str(int(v)) for v in value)
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"

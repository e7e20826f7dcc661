from ..errors import ConfigError
from .base import Detector

_REGISTRY: dict[str, type[Detector]] = {}


def register(cls: type[Detector]) -> type[Detector]:
    if not cls.name:
        raise ValueError(f"{cls.__name__} has no name")
    if _REGISTRY.get(cls.name, cls) is not cls:
        raise ValueError(f"detector {cls.name} already registered")
    _REGISTRY[cls.name] = cls
    return cls


def create(name: str) -> Detector:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ConfigError(f"unknown detector {name}; available: {', '.join(available())}") from None


def available() -> list[str]:
    return sorted(_REGISTRY)

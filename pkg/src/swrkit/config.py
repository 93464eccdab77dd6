"""Service configuration: TOML file plus environment overrides.

Resolution order per key: environment variable, then config file, then
the built-in default.  Environment names: SWRVIZ_DATA_DIR, SWRVIZ_BIND,
SWRVIZ_WEIGHTS, SWRVIZ_STATIC_DIR.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import tomli

from .errors import FormatError

_KEYS = ("data_dir", "bind", "default_ship", "weights_path", "linear_mode",
         "static_dir")


@dataclass(frozen=True)
class ServiceConfig:
    """Settings the HTTP service runs under.

    ``default_ship`` may be a bundled preset name or a path to a ship
    JSON document; ``weights_path`` points at trained surrogate weights
    (``None`` means forecasts fall back to persistence).  ``linear_mode``
    declares how those weights were trained, so forecasts evaluate the
    surrogate the same way by default.  ``static_dir`` names a directory
    of web client files to serve at ``/`` (``None`` keeps the service
    API-only).
    """

    data_dir: str = "swrviz-data"
    bind: str = "127.0.0.1:8080"
    default_ship: str = "tokai-liner"
    weights_path: str | None = None
    linear_mode: bool = False
    static_dir: str | None = None

    @property
    def host(self):
        return self.bind.rsplit(":", 1)[0]

    @property
    def port(self):
        part = self.bind.rsplit(":", 1)
        if len(part) != 2 or not part[1].isdigit():
            raise FormatError("bind must look like host:port, got %r"
                              % (self.bind,))
        return int(part[1])


def load_config(path=None, env=None):
    """Read configuration, applying environment overrides.

    ``path=None`` skips the file and uses defaults plus environment.
    Unknown keys in the file are rejected so typos fail loudly.
    """
    env = os.environ if env is None else env
    doc = {}
    if path is not None:
        with open(path, "rb") as f:
            try:
                raw = tomli.load(f)
            except tomli.TOMLDecodeError as exc:
                raise FormatError("bad config file %s: %s" % (path, exc))
        unknown = set(raw) - set(_KEYS)
        if unknown:
            raise FormatError("unknown config keys: %s"
                              % ", ".join(sorted(unknown)))
        doc.update(raw)
    if env.get("SWRVIZ_DATA_DIR"):
        doc["data_dir"] = env["SWRVIZ_DATA_DIR"]
    if env.get("SWRVIZ_BIND"):
        doc["bind"] = env["SWRVIZ_BIND"]
    if env.get("SWRVIZ_WEIGHTS"):
        doc["weights_path"] = env["SWRVIZ_WEIGHTS"]
    if env.get("SWRVIZ_STATIC_DIR"):
        doc["static_dir"] = env["SWRVIZ_STATIC_DIR"]
    cfg = ServiceConfig(**{k: v for k, v in doc.items() if k in _KEYS})
    cfg.port
    return cfg

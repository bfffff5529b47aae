"""Agent configuration: a single JSON file selecting ports, the active
ruleset, store files, and the optional header-hygiene flags."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class ConfigError(Exception):
    pass


@dataclass
class AgentConfig:
    proxy_host: str = "127.0.0.1"
    proxy_port: int = 8640
    control_host: str = "127.0.0.1"
    control_port: int = 8765
    ruleset: str = "preset:cautious"  # path to .apr file, or preset:NAME
    repository_file: str | None = None
    override_file: str | None = None
    schema_files: list[str] = field(default_factory=list)  # .pds extensions
    strip_referrer: bool = False
    block_cookies: bool = False
    warn_timeout: float = 30.0
    fetch_timeout: float = 10.0
    policy_ttl: float = 86400.0
    static_dir: str | None = None  # dashboard assets served at / on the control port

    @classmethod
    def from_file(cls, path: str) -> "AgentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "AgentConfig":
        known = {
            "proxy-host": "proxy_host",
            "proxy-port": "proxy_port",
            "control-host": "control_host",
            "control-port": "control_port",
            "ruleset": "ruleset",
            "repository-file": "repository_file",
            "override-file": "override_file",
            "schema-files": "schema_files",
            "strip-referrer": "strip_referrer",
            "block-cookies": "block_cookies",
            "warn-timeout": "warn_timeout",
            "fetch-timeout": "fetch_timeout",
            "policy-ttl": "policy_ttl",
            "static-dir": "static_dir",
        }
        kwargs = {}
        for key, value in raw.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[known[key]] = value
        return cls(**kwargs)

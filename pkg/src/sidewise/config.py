"""Scenario configuration: sectioned key-value files with a canonical form.

Configs use INI-style sections per module (parsed with the standard
configparser); every parsed config re-serializes to a canonical text whose
git-style content hash goes into the run summary, making scenarios diffable
and runs reproducible.
"""

from __future__ import annotations

import configparser
import hashlib
import io

import numpy as np

from .coefficients import CoefficientField, from_csv

_KNOWN_SECTIONS = ("coefficients", "grid", "problem", "method", "output",
                   "observability")


class ConfigError(ValueError):
    pass


class RunConfig:
    """Typed view over the sectioned scenario file."""

    def __init__(self, sections: dict[str, dict[str, str]]):
        for name in sections:
            if name not in _KNOWN_SECTIONS:
                raise ConfigError(f"unknown config section [{name}]")
        # values are normalized on entry, so parsing is idempotent and the
        # canonical text is a fixed point
        self.sections = {name: {k: _canon_value(v) for k, v in sorted(kv.items())}
                         for name, kv in sorted(sections.items())}

    # -- parsing ------------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        return cls({s: dict(parser.items(s)) for s in parser.sections()})

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, "r") as fh:
            return cls.from_text(fh.read())

    def get(self, section: str, key: str, default=None, kind=str):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            if default is None and kind is not str:
                return None
            return default
        try:
            if kind is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            if kind is list:
                return [float(v) for v in raw.replace("[", "").replace("]", "").split(",")
                        if v.strip()]
            return kind(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc

    def require(self, section: str, key: str, kind=str):
        val = self.get(section, key, default=None, kind=kind)
        if val is None:
            raise ConfigError(f"[{section}] missing required key {key!r}")
        return val

    # -- canonical form -----------------------------------------------------

    def canonical_text(self) -> str:
        """Deterministic re-serialization (sorted sections and keys)."""
        out = io.StringIO()
        for name, kv in self.sections.items():
            out.write(f"[{name}]\n")
            for key, val in kv.items():
                out.write(f"{key} = {val}\n")
            out.write("\n")
        return out.getvalue()

    def content_hash(self) -> str:
        """Git-style blob hash of the canonical text."""
        body = self.canonical_text().encode()
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()

    # -- domain objects -----------------------------------------------------

    def coefficient_field(self) -> CoefficientField:
        length = self.get("coefficients", "l", 1.0, float)
        rho_csv = self.get("coefficients", "rho_csv")
        a_csv = self.get("coefficients", "a_csv")
        if rho_csv or a_csv:
            return from_csv(length, rho_csv, a_csv,
                            rho=self.get("coefficients", "rho", 1.0, float) if not rho_csv else 1.0,
                            a=self.get("coefficients", "a", 1.0, float) if not a_csv else 1.0)
        rho = self.get("coefficients", "rho", "1.0")
        a = self.get("coefficients", "a", "1.0")
        rho_samples = np.array([float(v) for v in str(rho).split(",")])
        a_samples = np.array([float(v) for v in str(a).split(",")])
        return CoefficientField(length, rho_samples, a_samples)


def _canon_value(val: str) -> str:
    parts = [p.strip() for p in val.split(",")] if "," in val else [val.strip()]
    normed = []
    for p in parts:
        try:
            normed.append("%.17g" % float(p))
        except ValueError:
            normed.append(p)
    return ", ".join(normed)

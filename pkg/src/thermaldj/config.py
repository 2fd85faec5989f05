"""Sectioned text config files describing a spin system.

Three sections are recognized:

    [spins]        one spin per line: label, offset_hz, optional channel
    [couplings]    one pair per line: label_k, label_l, J_hz
    [grid]         delta_us <value>   (optional delay grid spacing)

Lines starting with '#' are comments.  Unknown sections or keys are
rejected, so a typo cannot silently change the physics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .spin_algebra import SpinSystem


class ConfigError(ValueError):
    """Malformed spin-system config file."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class SpinSystemConfig:
    system: SpinSystem
    grid_delta_us: float | None = None

    @property
    def grid_delta_s(self) -> float | None:
        return None if self.grid_delta_us is None else self.grid_delta_us * 1e-6


def parse_spin_system(text: str) -> SpinSystemConfig:
    """Parse config text into a validated SpinSystem plus grid metadata."""
    section = None
    spins: list[tuple[str, float, str | None]] = []
    couplings: list[tuple[str, str, float]] = []
    grid_delta: float | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("spins", "couplings", "grid"):
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if section is None:
            raise ConfigError("content before the first section header", lineno)
        fields = line.split()
        if section == "spins":
            if len(fields) not in (2, 3):
                raise ConfigError(
                    "spin lines are: label offset_hz [channel]", lineno
                )
            label = fields[0]
            if any(label == s[0] for s in spins):
                raise ConfigError(f"duplicate spin label {label!r}", lineno)
            try:
                offset = float(fields[1])
            except ValueError:
                raise ConfigError(f"bad offset {fields[1]!r}", lineno)
            channel = fields[2] if len(fields) == 3 else None
            spins.append((label, offset, channel))
        elif section == "couplings":
            if len(fields) != 3:
                raise ConfigError("coupling lines are: label label J_hz", lineno)
            try:
                j = float(fields[2])
            except ValueError:
                raise ConfigError(f"bad coupling constant {fields[2]!r}", lineno)
            couplings.append((fields[0], fields[1], j))
        else:  # grid
            if len(fields) != 2 or fields[0] != "delta_us":
                raise ConfigError(
                    "the grid section takes exactly: delta_us <value>", lineno
                )
            try:
                grid_delta = float(fields[1])
            except ValueError:
                raise ConfigError(f"bad grid spacing {fields[1]!r}", lineno)
            if grid_delta <= 0.0:
                raise ConfigError("grid spacing must be positive", lineno)

    if not spins:
        raise ConfigError("config defines no spins")
    labels = [s[0] for s in spins]
    index = {label: k + 1 for k, label in enumerate(labels)}
    jmap: dict[tuple[int, int], float] = {}
    for la, lb, j in couplings:
        if la not in index or lb not in index:
            missing = la if la not in index else lb
            raise ConfigError(f"coupling references unknown spin {missing!r}")
        if la == lb:
            raise ConfigError(f"spin {la!r} cannot couple to itself")
        pair = (min(index[la], index[lb]), max(index[la], index[lb]))
        if pair in jmap:
            raise ConfigError(f"duplicate coupling {la!r}-{lb!r}")
        jmap[pair] = j

    channels = None
    if any(s[2] is not None for s in spins):
        channels = tuple(s[2] if s[2] is not None else f"ch{k + 1}" for k, s in enumerate(spins))
    system = SpinSystem.from_couplings(
        nspins=len(spins),
        couplings=jmap,
        offsets=[s[1] for s in spins],
        labels=labels,
        channels=channels,
    )
    return SpinSystemConfig(system=system, grid_delta_us=grid_delta)


def load_spin_system(path: str) -> SpinSystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spin_system(fh.read())

"""Scenario parsing, validation, and reproducible artifact IO.

A scenario is one experiment: a preset, a command, physical parameters,
and per-command options.  Running it writes plain JSON/CSV artifacts plus
a run record holding the scenario, the tool version, and a checksum
manifest of every artifact (the record itself excluded, since it carries
wall time).  Byte-identical replay under a fixed seed is the contract:
all randomness is drawn from streams derived from one root seed and a
subsystem label, every JSON file is written with sorted keys, and floats
serialize through repr.
"""

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import yaml

try:
    from importlib.metadata import version as _version
    TOOL_VERSION = _version("toruslab")
except Exception:                                     # pragma: no cover
    TOOL_VERSION = "0.1.0"

COMMANDS = ("orbits", "classify", "franks", "phin", "entropy", "constants")
TONELLI_PRESETS = ("free-torus", "pendulum-torus", "two-wave", "magnetic",
                   "skewed-free")
ALL_PRESETS = TONELLI_PRESETS + ("cat-suspension",)


class ValidationError(ValueError):
    """Bad scenario input; carries the offending field path."""

    def __init__(self, field_path, message):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


@dataclass
class Scenario:
    """One validated experiment description."""

    preset: str
    command: str
    c: float = None
    params: dict = field(default_factory=dict)      # preset constructor kwargs
    options: dict = field(default_factory=dict)     # command-specific knobs
    seed: int = 0
    threads: int = 1
    out_dir: str = "runs"

    @classmethod
    def from_config(cls, cfg, overrides=None):
        """Build from a parsed config mapping plus CLI overrides."""
        if not isinstance(cfg, dict):
            raise ValidationError("<root>", "config must be a mapping")
        known = {"preset", "command", "c", "params", "options", "seed",
                 "threads", "out"}
        for key in cfg:
            if key not in known:
                raise ValidationError(key, f"unknown field (expected one of {sorted(known)})")
        data = dict(cfg)
        for key, val in (overrides or {}).items():
            if val is not None:
                data[key] = val
        return cls(preset=data.get("preset"), command=data.get("command"),
                   c=data.get("c"), params=data.get("params") or {},
                   options=data.get("options") or {},
                   seed=int(data.get("seed", 0)),
                   threads=int(data.get("threads", 1)),
                   out_dir=str(data.get("out", "runs")))

    def validate(self):
        """Check fields and build the model; returns it (None for synthetic).

        The energy bound c > e0 is enforced here, before any computation.
        """
        if self.preset not in ALL_PRESETS:
            raise ValidationError("preset",
                                  f"unknown preset {self.preset!r}; available: {list(ALL_PRESETS)}")
        if self.command not in COMMANDS:
            raise ValidationError("command",
                                  f"unknown command {self.command!r}; available: {list(COMMANDS)}")
        if not isinstance(self.params, dict):
            raise ValidationError("params", "must be a mapping of preset arguments")
        if not isinstance(self.options, dict):
            raise ValidationError("options", "must be a mapping of command options")
        if self.threads < 1:
            raise ValidationError("threads", "must be >= 1")
        from .presets import build_preset
        if self.preset == "cat-suspension":
            if self.command != "entropy":
                raise ValidationError("command",
                                      "cat-suspension is synthetic (entropy validation only)")
            return build_preset(self.preset, **self.params)
        try:
            model = build_preset(self.preset, **self.params)
        except TypeError as exc:
            raise ValidationError("params", str(exc)) from exc
        if self.c is None:
            raise ValidationError("c", "energy level required for Tonelli presets")
        e0 = model.rest_energy()[0]
        if not self.c > e0:
            raise ValidationError(
                "c", f"energy level {self.c} does not project onto the torus "
                     f"(needs c > e0 = {e0:.6g})")
        return model

    def canonical(self):
        return {"preset": self.preset, "command": self.command, "c": self.c,
                "params": self.params, "options": self.options,
                "seed": self.seed, "threads": self.threads}

    @property
    def hash(self):
        blob = json.dumps(self.canonical(), sort_keys=True, default=float)
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path):
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    if cfg is None:
        cfg = {}
    return cfg


def stable_seed(root_seed, label):
    """Deterministic per-subsystem stream seed from one root seed."""
    digest = hashlib.sha256(f"{root_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# --------------------------------------------------------------------------
# Artifact IO


def write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n"
    Path(path).write_text(text)


def write_jsonl(path, records):
    lines = [json.dumps(rec, sort_keys=True, default=float) for rec in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def file_sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def collect_manifest(out_dir, exclude=("run.json", "replay.json")):
    out = Path(out_dir)
    manifest = {}
    for p in sorted(out.iterdir()):
        if p.is_file() and p.name not in exclude:
            manifest[p.name] = file_sha256(p)
    return manifest


@dataclass
class RunRecord:
    """What a run was and what it produced, sufficient for replay."""

    scenario: dict
    scenario_hash: str
    tool_version: str
    wall_time: float
    manifest: dict

    def to_dict(self):
        return {"scenario": self.scenario, "scenario_hash": self.scenario_hash,
                "tool_version": self.tool_version, "wall_time": self.wall_time,
                "manifest": self.manifest}

    def write(self, out_dir):
        write_json(Path(out_dir) / "run.json", self.to_dict())


def make_record(scenario, out_dir, t_start):
    return RunRecord(scenario=scenario.canonical(), scenario_hash=scenario.hash,
                     tool_version=TOOL_VERSION, wall_time=time.time() - t_start,
                     manifest=collect_manifest(out_dir))


def load_record(out_dir):
    path = Path(out_dir) / "run.json"
    if not path.exists():
        raise ValidationError("out", f"no run.json under {out_dir}")
    data = json.loads(path.read_text())
    return RunRecord(scenario=data["scenario"], scenario_hash=data["scenario_hash"],
                     tool_version=data["tool_version"], wall_time=data["wall_time"],
                     manifest=data["manifest"])

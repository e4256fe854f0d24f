"""
Run manifests: the record of one CLI invocation.

A manifest holds the command name, the scenario file, every resolved parameter,
the seed, the tool version and the SHA-256 digest of each output. ``to_argv``
turns it back into the command line that produced it, which is what ``replay``
runs.
"""
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from src import __version__, config
from src.logger.logger import MyLogger
from src.model.errors import ReplicationError
from src.reporting.hashing import sha256_file, sha256_text
from src.reporting.tables import canonical_json, write_json

logger = MyLogger(config.LOG_NAME)

MANIFEST_SUFFIX = ".manifest.json"


class ManifestError(ReplicationError, ValueError):
    """A manifest file is unreadable or does not describe a known run."""


def manifest_filename(command: str) -> str:
    return f"{command}{MANIFEST_SUFFIX}"


def _canonical_value(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_canonical_value(item) for item in value]
    return value


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


@dataclass(frozen=True)
class OutputFile:
    path: str
    sha256: str


@dataclass(frozen=True)
class RunManifest:
    """
    :param command: Subcommand name, e.g. ``capacity``.
    :param scenario_path: Absolute path of the scenario file, or None for the built-in defaults.
    :param scenario_sha256: Digest of the scenario file at run time.
    :param parameters: Resolved option values keyed by option name (underscored).
    :param seed: Master seed of the run.
    :param tool_version: Package version that wrote the manifest.
    :param outputs: Output files, paths relative to the manifest's directory.
    """
    command: str
    scenario_path: Optional[str]
    scenario_sha256: Optional[str]
    parameters: Dict[str, Any]
    seed: int
    tool_version: str = __version__
    outputs: Tuple[OutputFile, ...] = field(default=())

    def _canonical_parameters(self) -> Dict[str, Any]:
        return {key: _canonical_value(value) for key, value in sorted(self.parameters.items())}

    def as_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "scenario_path": self.scenario_path,
            "scenario_sha256": self.scenario_sha256,
            "parameters": self._canonical_parameters(),
            "seed": self.seed,
            "tool_version": self.tool_version,
            "run_id": self.run_id,
            "outputs": [{"path": out.path, "sha256": out.sha256} for out in self.outputs],
        }

    @property
    def run_id(self) -> str:
        """Digest of what determines the outputs (not the outputs themselves); every output carries it."""
        return sha256_text([self.command, self.scenario_sha256 or "", canonical_json(self._canonical_parameters()),
                            str(self.seed), self.tool_version])

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "RunManifest":
        try:
            return cls(
                command=document["command"],
                scenario_path=document.get("scenario_path"),
                scenario_sha256=document.get("scenario_sha256"),
                parameters=dict(document["parameters"]),
                seed=int(document["seed"]),
                tool_version=document.get("tool_version", __version__),
                outputs=tuple(OutputFile(out["path"], out["sha256"]) for out in document.get("outputs", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ManifestError(f"Malformed manifest: {e}")

    def to_argv(self) -> List[str]:
        """
        Command line reproducing the run: the subcommand, ``--scenario``, ``--seed``
        and one flag per parameter. True booleans become bare flags, False and None
        are omitted, and list values repeat their flag.
        """
        argv = [self.command]
        if self.scenario_path is not None:
            argv += ["--scenario", self.scenario_path]
        argv += ["--seed", str(self.seed)]
        for name, value in sorted(self.parameters.items()):
            if value is None or value is False:
                continue
            if value is True:
                argv.append(_flag(name))
            elif isinstance(value, (list, tuple)):
                for item in value:
                    argv += [_flag(name), str(item)]
            else:
                argv += [_flag(name), str(value)]
        return argv

    def with_outputs(self, out_dir: str, paths: List[str]) -> "RunManifest":
        """Copy of the manifest listing ``paths`` (relative to ``out_dir``) with their digests."""
        outputs = tuple(OutputFile(path, sha256_file(os.path.join(out_dir, path))) for path in sorted(paths))
        return RunManifest(self.command, self.scenario_path, self.scenario_sha256, self.parameters,
                           self.seed, self.tool_version, outputs)


def write_manifest(manifest: RunManifest, out_dir: str) -> str:
    path = os.path.join(out_dir, manifest_filename(manifest.command))
    write_json(manifest.as_dict(), path)
    logger.info(f"Wrote manifest {path} ({len(manifest.outputs)} outputs)")
    return path


def load_manifest(filepath: str) -> RunManifest:
    """
    :raises ManifestError: If the file is missing, is not JSON, or lacks required fields.
    """
    try:
        with open(filepath, "r", encoding="utf-8") as f:
            document = json.load(f)
    except FileNotFoundError:
        raise ManifestError(f"Manifest file not found: {filepath}")
    except json.JSONDecodeError as e:
        raise ManifestError(f"Manifest {filepath} is not valid JSON: {e}")
    if not isinstance(document, dict):
        raise ManifestError(f"Manifest {filepath} must hold a JSON object")
    manifest = RunManifest.from_dict(document)
    if manifest.tool_version != __version__:
        logger.warning(f"Manifest written by version {manifest.tool_version}, replaying with {__version__}")
    return manifest


def verify_outputs(manifest: RunManifest, out_dir: str) -> List[str]:
    """Relative paths whose current digest differs from the manifest's (or that are missing)."""
    mismatched = []
    for out in manifest.outputs:
        path = os.path.join(out_dir, out.path)
        if not os.path.isfile(path) or sha256_file(path) != out.sha256:
            mismatched.append(out.path)
    return mismatched

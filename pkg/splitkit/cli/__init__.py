"""Scene-file driven command line."""

from .main import build_parser, cmd_decompose, cmd_simulate, cmd_verify, main, write_json
from .scene import Scene, build_xi, load
from .schemas import SceneSchema, load_manifest, load_scene, parse_manifest, parse_scene

__all__ = [
    "build_parser",
    "cmd_decompose",
    "cmd_simulate",
    "cmd_verify",
    "main",
    "write_json",
    "Scene",
    "build_xi",
    "load",
    "SceneSchema",
    "load_manifest",
    "load_scene",
    "parse_manifest",
    "parse_scene",
]

"""Run configuration: an INI-style ``key = value`` file.

Keys may be placed in any section (or none); section names are for the
reader's benefit only. Relative paths resolve against the config file.
"""
import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from .beam import BeamMaterial
from .errors import ParseError
from .solid import SolidMaterial
from .solver import NewtonSettings

KEYS = {
    "mesh_file": str,
    "solid_youngs": float,
    "solid_poisson": float,
    "beam_youngs": float,
    "beam_area": float,
    "beam_inertia": float,
    "kappa": float,
    "n_gauss_mortar": int,
    "n_load_steps": int,
    "newton_abs_tol": float,
    "newton_rel_tol": float,
    "max_iterations": int,
    "output_every": int,
    "output_dir": str,
}

REQUIRED = ("mesh_file", "solid_youngs", "solid_poisson")
# all or none; required once the mesh contains beam elements
BEAM_KEYS = ("beam_youngs", "beam_area", "beam_inertia")


@dataclass(frozen=True)
class ConfigDocument:
    mesh_file: Path
    solid: SolidMaterial
    beam: BeamMaterial | None
    kappa: float
    n_gauss_mortar: int
    newton: NewtonSettings
    output_dir: Path
    output_every: int = 1

    def with_overrides(self, output_dir=None, steps=None):
        cfg = self
        if output_dir is not None:
            cfg = replace(cfg, output_dir=Path(output_dir))
        if steps is not None:
            cfg = replace(cfg, newton=replace(cfg.newton, n_load_steps=int(steps)))
        return cfg


def _flatten(text, path):
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), default_section="__defaults__"
    )
    try:
        parser.read_string("[__top__]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ParseError(str(exc).replace("\n", " "), getattr(exc, "lineno", None), path) from None
    flat = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            if key in flat:
                raise ParseError(f"key {key!r} given more than once", None, path)
            flat[key] = value
    return flat


def parse_config(text, path="<string>", base_dir="."):
    flat = _flatten(text, path)
    unknown = sorted(set(flat) - set(KEYS))
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(unknown)}", None, path)
    missing = [k for k in REQUIRED if k not in flat]
    if missing:
        raise ParseError(f"missing required keys: {', '.join(missing)}", None, path)
    values = {}
    for key, raw in flat.items():
        try:
            values[key] = KEYS[key](raw)
        except ValueError:
            raise ParseError(f"key {key!r}: cannot parse {raw!r}", None, path) from None

    base = Path(base_dir)
    mesh_file = Path(values["mesh_file"])
    if not mesh_file.is_absolute():
        mesh_file = base / mesh_file
    output_dir = Path(values.get("output_dir", "output"))
    if not output_dir.is_absolute():
        output_dir = base / output_dir

    try:
        solid = SolidMaterial(values["solid_youngs"], values["solid_poisson"])
        given = [k for k in BEAM_KEYS if k in values]
        if given and len(given) < len(BEAM_KEYS):
            missing = sorted(set(BEAM_KEYS) - set(given))
            raise ParseError(f"incomplete beam section, missing: {', '.join(missing)}", None, path)
        beam = BeamMaterial(*(values[k] for k in BEAM_KEYS)) if given else None
        newton = NewtonSettings(
            max_iterations=values.get("max_iterations", 20),
            abs_tol=values.get("newton_abs_tol", 1e-8),
            rel_tol=values.get("newton_rel_tol", 1e-10),
            n_load_steps=values.get("n_load_steps", 1),
        )
    except ValueError as exc:
        raise ParseError(str(exc), None, path) from None
    kappa = values.get("kappa", 100.0 * solid.youngs_modulus)
    if not kappa > 0:
        raise ParseError(f"kappa must be positive, got {kappa}", None, path)
    n_gauss = values.get("n_gauss_mortar", 6)
    if n_gauss < 1:
        raise ParseError("n_gauss_mortar must be >= 1", None, path)
    every = values.get("output_every", 1)
    if every < 1:
        raise ParseError("output_every must be >= 1", None, path)
    return ConfigDocument(mesh_file, solid, beam, float(kappa), n_gauss, newton, output_dir, every)


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(encoding="ascii"), str(path), path.parent)


def validate(config):
    """Check that referenced files exist."""
    if not Path(config.mesh_file).is_file():
        raise FileNotFoundError(f"mesh file not found: {config.mesh_file}")

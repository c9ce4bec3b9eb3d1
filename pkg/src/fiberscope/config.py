"""Line-based run configuration: ``[section]`` headers and ``key = value`` lines.

Comments start with ``#`` or ``;``.  Unknown sections and keys are errors, and
parsing reports every problem it finds instead of stopping at the first one.
:func:`render_config` is the canonical serializer; ``parse_config(render_config(c)) == c``.

Generator lines read ``name = kind [key=value ...]``, for example::

    [generators]
    g1 = residue j=0 seed=3
    g2 = rank-one support=0,1 seed=5
    g3 = file path=field.fibf
    g4 = sampled path=f.hsmp
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigParseError

ANALYSES = ("tile-check", "range", "oracle", "containment", "membership", "dimension",
            "decompose", "measure", "support-bound", "beta")
DEFAULT_ANALYSES = ANALYSES[:-1]  # beta needs explicit target/source
GENERATOR_KINDS = ("random", "residue", "rank-one", "zero", "file", "sampled")
GENERATOR_OPTIONS = {"random": {"seed", "support"}, "rank-one": {"seed", "support"},
                     "residue": {"seed", "j"}, "zero": set(), "file": {"path"},
                     "sampled": {"path"}}


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    kind: str
    seed: int | None = None
    residue: int | None = None
    support: tuple | None = None
    path: str | None = None

    def render(self) -> str:
        parts = [self.kind]
        if self.residue is not None:
            parts.append(f"j={self.residue}")
        if self.support is not None:
            parts.append("support=" + ",".join(str(j) for j in self.support))
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        if self.path is not None:
            parts.append(f"path={self.path}")
        return " ".join(parts)


@dataclass(frozen=True)
class RunConfig:
    d: int = 1
    c: float = 1.0
    N: int = 1
    S: int = 16
    K: int = 1
    M: int = 4
    L: float = 4.0
    a: float = 1.0
    b: float = 1.0
    pairs: tuple = (((0,), (0,)),)
    generators: tuple = ()
    tol_rank: float = 1e-8
    tol_member: float = 1e-8
    tol_supp: float = 1e-10
    analyses: tuple = DEFAULT_ANALYSES
    seed: int = 0
    out: str | None = None
    dump_fields: bool = False
    beta_target: str | None = None
    beta_source: str | None = None

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "pairs":
                value = [[list(m), list(n)] for m, n in value]
            elif f.name == "generators":
                value = {g.name: g.render() for g in value}
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


# section -> key -> (field name, converter)
def _int(text):
    if not re.fullmatch(r"[+-]?\d+", text.strip()):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(text)


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {text!r}")
    return value


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _name(text):
    text = text.strip()
    return text or None


def _analyses(text):
    items = tuple(a.strip() for a in text.split(",") if a.strip())
    unknown = [a for a in items if a not in ANALYSES]
    if unknown:
        raise ValueError(f"unknown analyses {unknown}; choose from {list(ANALYSES)}")
    # fixed execution order regardless of listing order
    return tuple(a for a in ANALYSES if a in items)


def _vector(text):
    return tuple(_int(t) for t in text.split(","))


def _pairs(text):
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if chunk.count(":") != 1:
            raise ValueError(f"gamma pair {chunk!r} must look like 'm:n'")
        m, n = chunk.split(":")
        out.append((_vector(m), _vector(n)))
    if not out:
        raise ValueError("gamma needs at least one pair")
    return tuple(out)


SCHEMA = {
    "lattice": {"d": ("d", _int), "c": ("c", _float), "N": ("N", _int), "S": ("S", _int),
                "K": ("K", _int)},
    "representation": {"M": ("M", _int), "L": ("L", _float)},
    "gamma": {"a": ("a", _float), "b": ("b", _float), "pairs": ("pairs", _pairs)},
    "tolerances": {"rank": ("tol_rank", _float), "member": ("tol_member", _float),
                   "supp": ("tol_supp", _float)},
    "run": {"analyses": ("analyses", _analyses), "seed": ("seed", _int), "out": ("out", _name),
            "dump_fields": ("dump_fields", _bool), "beta_target": ("beta_target", _name),
            "beta_source": ("beta_source", _name)},
    "generators": None,
}

_SECTION = re.compile(r"\[\s*([A-Za-z_][\w-]*)\s*\]")
_KEYVAL = re.compile(r"([A-Za-z_][\w-]*)\s*=\s*(.*)")


def _parse_generator(name, text):
    tokens = text.split()
    if not tokens:
        raise ValueError(f"generator {name!r} has no kind")
    kind, opts = tokens[0], {}
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"generator {name!r}: unknown kind {kind!r}; choose from {list(GENERATOR_KINDS)}")
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ValueError(f"generator {name!r}: option {tok!r} is not key=value")
        key, value = tok.split("=", 1)
        if key in opts:
            raise ValueError(f"generator {name!r}: option {key!r} given twice")
        opts[key] = value
    allowed = GENERATOR_OPTIONS[kind]
    extra = sorted(set(opts) - allowed)
    if extra:
        raise ValueError(f"generator {name!r}: unknown options {extra} for kind {kind!r}")
    spec = GeneratorSpec(
        name, kind,
        seed=_int(opts["seed"]) if "seed" in opts else None,
        residue=_int(opts["j"]) if "j" in opts else None,
        support=_vector(opts["support"]) if "support" in opts else None,
        path=opts.get("path"),
    )
    if kind == "residue" and spec.residue is None:
        raise ValueError(f"generator {name!r}: kind 'residue' needs j=<residue>")
    if kind in ("file", "sampled") and not spec.path:
        raise ValueError(f"generator {name!r}: kind {kind!r} needs path=<file>")
    return spec


def parse_config(text: str) -> RunConfig:
    """Parse and validate config text; raises :class:`ConfigParseError` listing all problems."""
    errors = []
    values = {}
    generators = []
    section = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = _SECTION.fullmatch(line)
        if m:
            section = m.group(1)
            if section not in SCHEMA:
                errors.append(f"line {lineno}: unknown section [{section}]")
            continue
        m = _KEYVAL.fullmatch(line)
        if not m:
            errors.append(f"line {lineno}: syntax error, expected 'key = value' or '[section]'")
            continue
        key, value = m.group(1), m.group(2).strip()
        if section is None:
            errors.append(f"line {lineno}: key {key!r} outside of any section")
            continue
        if section not in SCHEMA:
            continue
        if (section, key) in seen:
            errors.append(f"line {lineno}: duplicate key {key!r} in [{section}]")
            continue
        seen.add((section, key))
        if section == "generators":
            try:
                generators.append(_parse_generator(key, value))
            except ValueError as exc:
                errors.append(f"line {lineno}: {exc}")
            continue
        spec = SCHEMA[section].get(key)
        if spec is None:
            errors.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        name, conv = spec
        try:
            values[name] = conv(value)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: {exc}")
    cfg = RunConfig(**values, generators=tuple(generators))
    errors.extend(validate(cfg))
    if errors:
        raise ConfigParseError(errors)
    return cfg


def validate(cfg: RunConfig) -> list[str]:
    """Constraint violations of an otherwise well-formed config."""
    from .schrodinger import gamma_problems

    out = []
    for name in ("d", "N", "S", "K", "M"):
        if getattr(cfg, name) < 1:
            out.append(f"{name} must be >= 1")
    for name in ("c", "L"):
        if not getattr(cfg, name) > 0:
            out.append(f"{name} must be positive")
    for name in ("tol_rank", "tol_member", "tol_supp"):
        if not getattr(cfg, name) > 0:
            out.append(f"{name} must be positive")
    if cfg.d >= 1 and cfg.M >= 1:
        m = round(cfg.M ** (1.0 / cfg.d))
        if m ** cfg.d != cfg.M:
            out.append(f"M={cfg.M} is not a perfect {cfg.d}-th power")
        elif cfg.L > 0 and cfg.a != 0:
            ratio = cfg.a / (cfg.L / m)
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)):
                out.append(f"a={cfg.a} is not a multiple of the grid step L/M={cfg.L / m}")
    for m, n in cfg.pairs:
        if len(m) != cfg.d or len(n) != cfg.d:
            out.append(f"gamma pair {m}:{n} does not have dimension d={cfg.d}")
    out.extend(gamma_problems(cfg.a, cfg.b, [tuple(map(tuple, p)) for p in cfg.pairs], cfg.d))
    names = [g.name for g in cfg.generators]
    for g in cfg.generators:
        if g.kind not in GENERATOR_OPTIONS:
            out.append(f"generator {g.name!r}: unknown kind {g.kind!r}")
            continue
        used = {key for key, value in (("seed", g.seed), ("j", g.residue), ("support", g.support),
                                       ("path", g.path)) if value is not None}
        if used - GENERATOR_OPTIONS[g.kind]:
            out.append(f"generator {g.name!r}: options {sorted(used - GENERATOR_OPTIONS[g.kind])} "
                       f"do not apply to kind {g.kind!r}")
        if g.kind == "residue" and g.residue is not None and not 0 <= g.residue < cfg.N:
            out.append(f"generator {g.name!r}: residue {g.residue} is not in 0..{cfg.N - 1}")
        if g.support is not None and any(not 0 <= j < cfg.N for j in g.support):
            out.append(f"generator {g.name!r}: support {list(g.support)} leaves 0..{cfg.N - 1}")
        if g.kind == "sampled" and cfg.d != 1:
            out.append(f"generator {g.name!r}: sampled functions need d = 1")
    if "beta" in cfg.analyses:
        for label, ref in (("beta_target", cfg.beta_target), ("beta_source", cfg.beta_source)):
            if ref is None:
                out.append(f"analysis 'beta' needs {label}")
            elif ref not in names:
                out.append(f"{label} {ref!r} is not a declared generator")
    return out


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Canonical text form of ``cfg``."""
    lines = ["[lattice]"]
    for key in ("d", "c", "N", "S", "K"):
        lines.append(f"{key} = {_fmt(getattr(cfg, key))}")
    lines += ["", "[representation]", f"M = {cfg.M}", f"L = {_fmt(cfg.L)}"]
    pairs = "; ".join(",".join(map(str, m)) + ":" + ",".join(map(str, n)) for m, n in cfg.pairs)
    lines += ["", "[gamma]", f"a = {_fmt(cfg.a)}", f"b = {_fmt(cfg.b)}", f"pairs = {pairs}"]
    lines += ["", "[generators]"] + [f"{g.name} = {g.render()}" for g in cfg.generators]
    lines += ["", "[tolerances]", f"rank = {_fmt(cfg.tol_rank)}", f"member = {_fmt(cfg.tol_member)}",
              f"supp = {_fmt(cfg.tol_supp)}"]
    lines += ["", "[run]", "analyses = " + ", ".join(cfg.analyses), f"seed = {cfg.seed}",
              f"dump_fields = {_fmt(cfg.dump_fields)}"]
    for key in ("out", "beta_target", "beta_source"):
        if getattr(cfg, key) is not None:
            lines.append(f"{key} = {getattr(cfg, key)}")
    return "\n".join(lines) + "\n"

"""Run descriptions: scenario files, initial placement, bundled experiments.

Scenario files are line oriented, ``key = value`` under ``[section]``
headers::

    [automaton]
    builtin = five_species        # or: path = my.aut, or inline table lines

    [model]
    type = spatial                # mean | ssa | spatial

    [population]
    A = 50 @ 9.5,9.5,10.5,10.5    # count, optional region x0,y0,x1,y1
    D = 1000

    [arena]
    width = 20
    height = 20
    r = 0.3
    s = 0.3

    [run]
    T = 500
    seed = 7
    replicates = 20
    alpha = geometry              # or a number
    c_bin = 2
"""
import hashlib
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .automaton import ParticleAutomaton, parse_automaton, serialize_automaton
from .errors import (InputError, MissingField, ParseError, RegionOutOfBounds,
                     UnknownSpecies)
from .meanfield import DEFAULT_C_BIN
from .rng import RngStream
from .spatial import Arena, SpatialState, alpha_from_geometry, wrap

MODELS = ("mean", "ssa", "spatial")
BUNDLED_SCENARIOS = ("table1_sparse", "table1_dense",
                     "five_species_a", "five_species_b", "five_species_c")
BUNDLED_AUTOMATA = ("table1", "five_species")
GEOMETRY = "geometry"


@dataclass(frozen=True)
class Placement:
    species: str
    count: int
    region: Optional[tuple] = None  # (x0, y0, x1, y1); None = whole arena


@dataclass(frozen=True)
class ScenarioConfig:
    automaton: ParticleAutomaton
    model: str
    population: tuple
    arena: Optional[Arena] = None
    alpha: Union[float, str, None] = None
    T: int = 500
    seed: int = 0
    replicates: int = 1
    c_bin: float = DEFAULT_C_BIN
    # "builtin:<name>" or "path:<file>"; None means the table is inline
    automaton_source: Optional[str] = field(default=None, compare=False)

    @property
    def counts(self) -> np.ndarray:
        out = np.zeros(self.automaton.n, dtype=np.int64)
        for p in self.population:
            out[self.automaton.index(p.species)] += p.count
        return out

    @property
    def m(self) -> int:
        return int(self.counts.sum())

    def resolved_alpha(self) -> float:
        if self.alpha == GEOMETRY:
            return alpha_from_geometry(self.arena.r, self.arena.area, self.m)
        if self.alpha is None:
            raise MissingField("run", "alpha")
        return float(self.alpha)

    def hash(self) -> str:
        text = serialize_scenario(self, inline=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    if cfg.model not in MODELS:
        raise InputError(f"unknown model {cfg.model!r}; expected one of {MODELS}")
    seen = set()
    for p in cfg.population:
        cfg.automaton.index(p.species)
        if p.species in seen:
            raise InputError(f"species {p.species!r} listed twice in [population]")
        seen.add(p.species)
        if p.count < 0:
            raise InputError(f"negative count for {p.species!r}")
        if p.region is not None:
            if cfg.arena is None:
                raise MissingField("arena", "width")
            x0, y0, x1, y1 = p.region
            if not (0 <= x0 < x1 <= cfg.arena.width and 0 <= y0 < y1 <= cfg.arena.height):
                raise RegionOutOfBounds(
                    f"region {p.region} of {p.species!r} is not inside the "
                    f"{cfg.arena.width} x {cfg.arena.height} arena")
    if cfg.model == "spatial" and cfg.arena is None:
        raise MissingField("arena", "width")
    if cfg.model in ("mean", "ssa") and cfg.alpha is None:
        raise MissingField("run", "alpha")
    if cfg.alpha == GEOMETRY and cfg.arena is None:
        raise MissingField("arena", "width")
    if isinstance(cfg.alpha, float) and not 0.0 <= cfg.alpha <= 1.0:
        raise InputError(f"alpha must lie in [0, 1], got {cfg.alpha}")
    if cfg.T < 0 or cfg.replicates < 1 or cfg.seed < 0:
        raise InputError("T and seed must be non-negative and replicates positive")
    if not cfg.c_bin > 0:
        raise InputError("c_bin must be positive")
    if cfg.m == 0:
        raise InputError("empty population")
    return cfg


# -- files ---------------------------------------------------------------

def _data(name: str) -> str:
    return resources.files("massaction").joinpath("data").joinpath(name).read_text("utf-8")


def builtin_automaton(name: str) -> ParticleAutomaton:
    if name not in BUNDLED_AUTOMATA:
        raise InputError(f"no bundled automaton {name!r}; have {BUNDLED_AUTOMATA}")
    return parse_automaton(_data(name + ".aut"))


_SECTION = re.compile(r"^\[(\w+)\]$")
_KEYVAL = re.compile(r"^([^=\s]+)\s*=\s*(.*)$")


def _number(value, cast, section, key, lineno):
    try:
        return cast(value)
    except ValueError:
        raise ParseError(f"[{section}] {key}: cannot read {value!r}", lineno) from None


def parse_scenario(text: str, base_dir=None) -> ScenarioConfig:
    sections = {}
    inline = []
    where = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = _SECTION.match(line)
        if head:
            current = head.group(1)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno)
            sections[current] = {}
            continue
        if current is None:
            raise ParseError("content before the first [section]", lineno)
        kv = _KEYVAL.match(line)
        if current == "automaton" and not (kv and kv.group(1) in ("path", "builtin")):
            inline.append(raw)
            continue
        if not kv:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = kv.group(1), kv.group(2).strip()
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = value
        where[current, key] = lineno

    known = {"automaton", "model", "population", "arena", "run"}
    for name in sections:
        if name not in known:
            raise ParseError(f"unknown section [{name}]")

    # automaton
    auto = sections.get("automaton")
    if auto is None:
        raise MissingField("automaton", "path")
    if sum(bool(x) for x in (auto.get("path"), auto.get("builtin"), inline)) != 1:
        raise ParseError("[automaton] needs exactly one of path, builtin or inline tables")
    if "builtin" in auto:
        automaton = builtin_automaton(auto["builtin"])
        source = "builtin:" + auto["builtin"]
    elif "path" in auto:
        path = Path(auto["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            automaton = parse_automaton(path.read_text("utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read automaton file {path}: {exc}") from None
        source = "path:" + auto["path"]
    else:
        automaton = parse_automaton("\n".join(inline))
        source = None

    model = sections.get("model", {}).get("type")
    if model is None:
        raise MissingField("model", "type")

    population = []
    for name, value in sections.get("population", {}).items():
        lineno = where["population", name]
        if name not in automaton.species:
            raise UnknownSpecies(name)
        count_text, _, region_text = value.partition("@")
        count = _number(count_text.strip(), int, "population", name, lineno)
        region = None
        if region_text.strip():
            parts = [p.strip() for p in region_text.split(",")]
            if len(parts) != 4:
                raise ParseError(f"region for {name!r} needs x0,y0,x1,y1", lineno)
            region = tuple(_number(p, float, "population", name, lineno) for p in parts)
        population.append(Placement(name, count, region))
    if not population:
        raise MissingField("population", "<species>")

    arena = None
    if "arena" in sections:
        sec = sections["arena"]
        vals = {}
        for key in ("width", "height", "r", "s"):
            if key not in sec:
                raise MissingField("arena", key)
            vals[key] = _number(sec[key], float, "arena", key, where["arena", key])
        arena = Arena(**vals)

    run = sections.get("run", {})
    for key in run:
        if key not in ("T", "seed", "replicates", "alpha", "c_bin"):
            raise ParseError(f"unknown key {key!r} in [run]", where["run", key])

    def get(key, cast, default):
        if key not in run:
            return default
        return _number(run[key], cast, "run", key, where["run", key])

    alpha = run.get("alpha")
    if alpha is not None and alpha != GEOMETRY:
        alpha = get("alpha", float, None)

    cfg = ScenarioConfig(
        automaton=automaton,
        model=model,
        population=tuple(population),
        arena=arena,
        alpha=alpha,
        T=get("T", int, 500),
        seed=get("seed", int, 0),
        replicates=get("replicates", int, 1),
        c_bin=get("c_bin", float, DEFAULT_C_BIN),
        automaton_source=source,
    )
    return validate_config(cfg)


def serialize_scenario(cfg: ScenarioConfig, inline: bool = False) -> str:
    lines = ["[automaton]"]
    src = cfg.automaton_source
    if src is not None and not inline:
        kind, _, ref = src.partition(":")
        lines.append(f"{kind} = {ref}")
    else:
        lines += serialize_automaton(cfg.automaton).splitlines()
    lines += ["", "[model]", f"type = {cfg.model}", "", "[population]"]
    for p in cfg.population:
        text = f"{p.species} = {p.count}"
        if p.region is not None:
            text += " @ " + ",".join(repr(float(v)) for v in p.region)
        lines.append(text)
    if cfg.arena is not None:
        lines += ["", "[arena]"]
        for key in ("width", "height", "r", "s"):
            lines.append(f"{key} = {float(getattr(cfg.arena, key))!r}")
    lines += ["", "[run]", f"T = {cfg.T}", f"seed = {cfg.seed}",
              f"replicates = {cfg.replicates}"]
    if cfg.alpha is not None:
        alpha = cfg.alpha if cfg.alpha == GEOMETRY else repr(float(cfg.alpha))
        lines.append(f"alpha = {alpha}")
    lines.append(f"c_bin = {float(cfg.c_bin)!r}")
    return "\n".join(lines) + "\n"


def load_scenario(ref) -> ScenarioConfig:
    """Load a scenario file, or one of the bundled scenarios by name."""
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path.read_text("utf-8"), base_dir=path.parent)
    if str(ref) in BUNDLED_SCENARIOS:
        return parse_scenario(_data(f"{ref}.scenario"))
    raise InputError(f"no scenario file or bundled scenario named {str(ref)!r}")


# -- placement -----------------------------------------------------------

def init_spatial(cfg: ScenarioConfig, rng: RngStream) -> SpatialState:
    """Place particles i.i.d. uniformly over their regions.

    Ids run ``0..m-1`` in automaton species order.
    """
    if cfg.arena is None:
        raise MissingField("arena", "width")
    arena = cfg.arena
    by_species = {p.species: p for p in cfg.population}
    states, chunks = [], []
    for k, name in enumerate(cfg.automaton.species):
        p = by_species.get(name)
        if p is None or p.count == 0:
            continue
        x0, y0, x1, y1 = p.region or (0.0, 0.0, arena.width, arena.height)
        u = rng.random((p.count, 2))
        chunks.append(np.column_stack((x0 + (x1 - x0) * u[:, 0],
                                       y0 + (y1 - y0) * u[:, 1])))
        states.append(np.full(p.count, k))
    pos = wrap(np.concatenate(chunks), arena) if chunks else np.zeros((0, 2))
    states = np.concatenate(states) if states else np.zeros(0, dtype=np.intp)
    return SpatialState(np.arange(len(states)), states, pos)


# -- bundled five-species experiment --------------------------------------

FIVE_SPECIES = ("A", "B", "C", "D", "E")
FIVE_ARENA = Arena(width=20.0, height=20.0, r=0.3, s=0.3)


def five_species_automaton() -> ParticleAutomaton:
    """A meets B -> C; C converts D into E; B decays into D w.p. 0.5.

    C and E never change.  Everything not listed keeps its state.
    """
    A, B, C, D, E = range(5)
    solitary = np.eye(5)
    solitary[B] = 0.0
    solitary[B, B] = solitary[B, D] = 0.5
    binary = np.zeros((5, 5, 5))
    for q in range(5):
        binary[q, :, q] = 1.0
    binary[A, B] = np.eye(5)[C]
    binary[D, C] = np.eye(5)[E]
    return ParticleAutomaton(FIVE_SPECIES, solitary, binary)


def _unit_square(cx, cy):
    return (cx - 0.5, cy - 0.5, cx + 0.5, cy + 0.5)


def five_species_scenario(variant: str):
    """Scenario ``(a)``, ``(b)`` or ``(c)`` of the five-species experiment.

    a: A and B uniform; b: both in the unit square at the centre;
    c: A around (3, 3) and B around (17, 17).  D is always uniform.
    Returns ``(config, automaton)``.
    """
    if variant == "a":
        ra = rb = None
    elif variant == "b":
        ra = rb = _unit_square(10.0, 10.0)
    elif variant == "c":
        ra, rb = _unit_square(3.0, 3.0), _unit_square(17.0, 17.0)
    else:
        raise InputError(f"unknown variant {variant!r}; expected a, b or c")
    automaton = five_species_automaton()
    population = (
        Placement("A", 50, ra),
        Placement("B", 50, rb),
        Placement("C", 0),
        Placement("D", 1000),
        Placement("E", 0),
    )
    cfg = ScenarioConfig(
        automaton=automaton, model="spatial", population=population,
        arena=FIVE_ARENA, alpha=GEOMETRY, T=500, seed=0, replicates=20,
        automaton_source="builtin:five_species")
    return validate_config(cfg), automaton


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    return validate_config(replace(cfg, **changes)) if changes else cfg

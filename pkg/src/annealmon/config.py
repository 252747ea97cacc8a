"""Experiment configuration: a sectioned key-value text file with a schema id.

The file format is INI via configparser.  `load_config(save_config(cfg))`
returns an equal config; numeric ranges and referenced files are validated at
load time.  CLI flag overrides of the form ``section.key=value`` are applied
before parsing.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .errors import ConfigError

SCHEMA_ID = "annealmon-v1"


@dataclass(frozen=True)
class TopologySpec:
    kind: str = "chimera"  # chimera | import
    m: int = 4
    tile: int = 4
    path: str = ""
    defects: tuple[int, ...] = ()


@dataclass(frozen=True)
class EmbeddingSpec:
    source: str = "clique"  # clique | import
    k: int = 16
    path: str = ""


@dataclass(frozen=True)
class ProblemSpec:
    kind: str = "mc"  # mc | mvc
    n: int = 16
    density: float = 0.5
    graph_seed: int = 7
    a: float = 1.0
    b: float = 2.0
    graph_path: str = ""


@dataclass(frozen=True)
class IndicatorConfig:
    kind: str = "pi1"
    seed: int = 11


@dataclass(frozen=True)
class ChainStrengthConfig:
    mode: str = "utc"  # utc | fixed
    prefactor: float = 1.0
    value: float = 5.0


@dataclass(frozen=True)
class SamplingConfig:
    backend: str = "sim"
    calls: int = 2000
    reads: int = 100
    sweeps: int = 10
    seed: int = 123
    reduce_intersample_correlation: bool = True
    persist_reads: bool = False  # also write per-read energies (large)


@dataclass(frozen=True)
class NoiseConfig:
    beta_mean: float = 2.0
    reversion: float = 0.002
    volatility: float = 0.03
    dt: float = 1.0
    beta0: float = 2.0
    floor: float = 0.05
    seed: int = 99


@dataclass(frozen=True)
class AnalysisConfig:
    window: int = 500
    max_lag: int = 40
    adf_lags: str = "auto"  # "auto" or an integer literal
    tau: float = 0.5
    burn_in: int = 10
    strat_low: float = 0.2
    strat_high: float = 0.8


@dataclass(frozen=True)
class ExperimentConfig:
    output_dir: str = "out"
    topology: TopologySpec = field(default_factory=TopologySpec)
    embedding: EmbeddingSpec = field(default_factory=EmbeddingSpec)
    problems: tuple[ProblemSpec, ...] = (ProblemSpec(),)
    indicator: IndicatorConfig | None = field(default_factory=IndicatorConfig)
    chain_strength: ChainStrengthConfig = field(default_factory=ChainStrengthConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    @property
    def problem(self) -> ProblemSpec:
        return self.problems[0]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _problem_sections(cfg: ExperimentConfig) -> dict[str, ProblemSpec]:
    if len(cfg.problems) == 1:
        return {"problem": cfg.problems[0]}
    return {
        f"problem.{i + 1}": spec for i, spec in enumerate(cfg.problems)
    }


def save_config(cfg: ExperimentConfig, path: str) -> None:
    parser = configparser.ConfigParser()
    parser["experiment"] = {"schema": SCHEMA_ID, "output_dir": cfg.output_dir}
    parser["topology"] = {
        "kind": cfg.topology.kind,
        "m": _fmt(cfg.topology.m),
        "tile": _fmt(cfg.topology.tile),
        "path": cfg.topology.path,
        "defects": _fmt(cfg.topology.defects),
    }
    parser["embedding"] = {
        "source": cfg.embedding.source,
        "k": _fmt(cfg.embedding.k),
        "path": cfg.embedding.path,
    }
    for name, spec in _problem_sections(cfg).items():
        parser[name] = {
            "kind": spec.kind,
            "n": _fmt(spec.n),
            "density": _fmt(spec.density),
            "graph_seed": _fmt(spec.graph_seed),
            "a": _fmt(spec.a),
            "b": _fmt(spec.b),
            "graph_path": spec.graph_path,
        }
    if cfg.indicator is not None:
        parser["indicator"] = {
            "kind": cfg.indicator.kind,
            "seed": _fmt(cfg.indicator.seed),
        }
    parser["chain_strength"] = {
        "mode": cfg.chain_strength.mode,
        "prefactor": _fmt(cfg.chain_strength.prefactor),
        "value": _fmt(cfg.chain_strength.value),
    }
    parser["sampling"] = {
        "backend": cfg.sampling.backend,
        "calls": _fmt(cfg.sampling.calls),
        "reads": _fmt(cfg.sampling.reads),
        "sweeps": _fmt(cfg.sampling.sweeps),
        "seed": _fmt(cfg.sampling.seed),
        "reduce_intersample_correlation": _fmt(
            cfg.sampling.reduce_intersample_correlation
        ),
        "persist_reads": _fmt(cfg.sampling.persist_reads),
    }
    parser["noise"] = {
        "beta_mean": _fmt(cfg.noise.beta_mean),
        "reversion": _fmt(cfg.noise.reversion),
        "volatility": _fmt(cfg.noise.volatility),
        "dt": _fmt(cfg.noise.dt),
        "beta0": _fmt(cfg.noise.beta0),
        "floor": _fmt(cfg.noise.floor),
        "seed": _fmt(cfg.noise.seed),
    }
    parser["analysis"] = {
        "window": _fmt(cfg.analysis.window),
        "max_lag": _fmt(cfg.analysis.max_lag),
        "adf_lags": cfg.analysis.adf_lags,
        "tau": _fmt(cfg.analysis.tau),
        "burn_in": _fmt(cfg.analysis.burn_in),
        "strat_low": _fmt(cfg.analysis.strat_low),
        "strat_high": _fmt(cfg.analysis.strat_high),
    }
    with open(path, "w", encoding="utf-8") as f:
        parser.write(f)


def _get(section, key, cast, default=None):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(f"missing key {key!r} in section [{section.name}]")
    raw = section[key].strip()
    try:
        if cast is bool:
            return _parse_bool(raw)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {section.name}.{key}: {raw!r}") from exc


def _parse_problem(section) -> ProblemSpec:
    spec = ProblemSpec(
        kind=_get(section, "kind", str),
        n=_get(section, "n", int),
        density=_get(section, "density", float),
        graph_seed=_get(section, "graph_seed", int),
        a=_get(section, "a", float),
        b=_get(section, "b", float),
        graph_path=section.get("graph_path", "").strip(),
    )
    if spec.kind not in ("mc", "mvc"):
        raise ConfigError(f"problem kind must be mc or mvc, got {spec.kind!r}")
    if not 0.0 <= spec.density <= 1.0:
        raise ConfigError(f"problem density must lie in [0, 1], got {spec.density}")
    if spec.n < 1:
        raise ConfigError("problem size must be >= 1")
    return spec


def apply_overrides(parser: configparser.ConfigParser, overrides: list[str]) -> None:
    """Apply `section.key=value` strings on top of a parsed file."""
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        if section not in parser:
            parser[section] = {}
        parser[section][key] = value


def load_config(path: str, overrides: list[str] | None = None) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path, encoding="utf-8")
    if overrides:
        apply_overrides(parser, overrides)
    if "experiment" not in parser:
        raise ConfigError("missing [experiment] section")
    schema = parser["experiment"].get("schema", "")
    if schema != SCHEMA_ID:
        raise ConfigError(f"unsupported schema {schema!r}; expected {SCHEMA_ID!r}")

    topo_sec = parser["topology"]
    topology = TopologySpec(
        kind=_get(topo_sec, "kind", str),
        m=_get(topo_sec, "m", int, 4),
        tile=_get(topo_sec, "tile", int, 4),
        path=topo_sec.get("path", "").strip(),
        defects=tuple(
            int(v) for v in topo_sec.get("defects", "").split(",") if v.strip()
        ),
    )
    if topology.kind not in ("chimera", "import"):
        raise ConfigError(f"topology kind must be chimera or import, got {topology.kind!r}")
    if topology.kind == "chimera" and topology.m < 1:
        raise ConfigError("chimera grid size must be >= 1")
    if topology.kind == "import" and not os.path.exists(topology.path):
        raise ConfigError(f"topology file not found: {topology.path!r}")

    emb_sec = parser["embedding"]
    embedding = EmbeddingSpec(
        source=_get(emb_sec, "source", str),
        k=_get(emb_sec, "k", int, 1),
        path=emb_sec.get("path", "").strip(),
    )
    if embedding.source not in ("clique", "import"):
        raise ConfigError(
            f"embedding source must be clique or import, got {embedding.source!r}"
        )
    if embedding.source == "import" and not os.path.exists(embedding.path):
        raise ConfigError(f"embedding file not found: {embedding.path!r}")

    problem_names = sorted(
        name for name in parser.sections() if name == "problem" or name.startswith("problem.")
    )
    if not problem_names:
        raise ConfigError("no [problem] section found")
    problems = tuple(_parse_problem(parser[name]) for name in problem_names)
    for spec in problems:
        if spec.graph_path and not os.path.exists(spec.graph_path):
            raise ConfigError(f"problem graph file not found: {spec.graph_path!r}")

    indicator = None
    if "indicator" in parser:
        ind_sec = parser["indicator"]
        indicator = IndicatorConfig(
            kind=_get(ind_sec, "kind", str),
            seed=_get(ind_sec, "seed", int),
        )
        if indicator.kind not in ("pi1", "pi2"):
            raise ConfigError(f"indicator kind must be pi1 or pi2, got {indicator.kind!r}")

    cs_sec = parser["chain_strength"]
    chain_strength = ChainStrengthConfig(
        mode=_get(cs_sec, "mode", str),
        prefactor=_get(cs_sec, "prefactor", float, 1.0),
        value=_get(cs_sec, "value", float, 5.0),
    )
    if chain_strength.mode not in ("utc", "fixed"):
        raise ConfigError(f"chain strength mode must be utc or fixed, got {chain_strength.mode!r}")
    if chain_strength.prefactor <= 0 or chain_strength.value <= 0:
        raise ConfigError("chain strength parameters must be positive")

    smp_sec = parser["sampling"]
    sampling = SamplingConfig(
        backend=_get(smp_sec, "backend", str, "sim"),
        calls=_get(smp_sec, "calls", int),
        reads=_get(smp_sec, "reads", int),
        sweeps=_get(smp_sec, "sweeps", int),
        seed=_get(smp_sec, "seed", int),
        reduce_intersample_correlation=_get(
            smp_sec, "reduce_intersample_correlation", bool, True
        ),
        persist_reads=_get(smp_sec, "persist_reads", bool, False),
    )
    if sampling.calls < 1 or sampling.reads < 1 or sampling.sweeps < 1:
        raise ConfigError("calls, reads, and sweeps must all be >= 1")

    noise_sec = parser["noise"]
    noise = NoiseConfig(
        beta_mean=_get(noise_sec, "beta_mean", float),
        reversion=_get(noise_sec, "reversion", float),
        volatility=_get(noise_sec, "volatility", float),
        dt=_get(noise_sec, "dt", float, 1.0),
        beta0=_get(noise_sec, "beta0", float),
        floor=_get(noise_sec, "floor", float, 0.05),
        seed=_get(noise_sec, "seed", int),
    )
    if noise.beta_mean <= 0 or noise.dt <= 0 or noise.floor <= 0:
        raise ConfigError("beta_mean, dt, and floor must be positive")
    if noise.reversion < 0 or noise.volatility < 0:
        raise ConfigError("reversion and volatility must be non-negative")

    ana_sec = parser["analysis"]
    analysis = AnalysisConfig(
        window=_get(ana_sec, "window", int),
        max_lag=_get(ana_sec, "max_lag", int, 40),
        adf_lags=ana_sec.get("adf_lags", "auto").strip(),
        tau=_get(ana_sec, "tau", float, 0.5),
        burn_in=_get(ana_sec, "burn_in", int, 10),
        strat_low=_get(ana_sec, "strat_low", float, 0.2),
        strat_high=_get(ana_sec, "strat_high", float, 0.8),
    )
    if analysis.window < 1:
        raise ConfigError("analysis window must be >= 1")
    if analysis.adf_lags != "auto":
        try:
            int(analysis.adf_lags)
        except ValueError:
            raise ConfigError(
                f"adf_lags must be 'auto' or an integer, got {analysis.adf_lags!r}"
            ) from None
    if not 0.0 < analysis.tau < 1.0:
        raise ConfigError(f"tau must lie in (0, 1), got {analysis.tau}")
    if analysis.burn_in < 1:
        raise ConfigError("burn_in must be >= 1")
    if not 0.0 <= analysis.strat_low < analysis.strat_high <= 1.0:
        raise ConfigError("stratification cuts must satisfy 0 <= low < high <= 1")

    return ExperimentConfig(
        output_dir=parser["experiment"].get("output_dir", "out"),
        topology=topology,
        embedding=embedding,
        problems=problems,
        indicator=indicator,
        chain_strength=chain_strength,
        sampling=sampling,
        noise=noise,
        analysis=analysis,
    )

"""End-to-end experiment pipelines and their artifacts.

A run builds: topology -> clique embedding -> problem model -> idle region ->
indicator -> combined autoscaled hardware program, then streams batched calls
through a backend, records per-call mean energies for both sub-models, and
runs the full statistics plus the two-phase gate.  Everything an analysis
needs afterwards is re-derivable from the raw per-call CSV plus the config,
and identical configs produce byte-identical artifacts.
"""

from __future__ import annotations

import contextlib
import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import timeseries as ts
from .config import (
    AnalysisConfig,
    ExperimentConfig,
    ProblemSpec,
    save_config,
)
from .embedding import (
    ChainStrengthPolicy,
    Embedding,
    chimera_clique_embedding,
    embed_qubo,
    load_embedding,
)
from .errors import AnnealmonError, ConfigError, StageError
from .kernels import (
    CompiledQubo,
    compile_qubo,
    decode_chain_batch,
    energies_for_states,
)
from .monitor import BurnInStore, stratify
from .problems import (
    IndicatorSpec,
    PenaltyWeights,
    gen_er_graph,
    gen_indicator,
    load_graph,
    mc_qubo,
    mvc_qubo,
)
from .qubo import QuboModel, autoscale, combine_with_indicator
from .sampler import (
    AnnealCallConfig,
    NoiseProcessState,
    create_backend,
)
from .topology import HardwareGraph, apply_defects, chimera, idle_region, import_graph

# substream index reserved for chain tie-breaking; read substreams use
# small read indices under the same (seed, call) key
_TIE_STREAM = 2**40


def _fmt(x: float) -> str:
    return repr(float(x))


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass
class RunArtifacts:
    """Paths of everything a pipeline wrote, plus the in-memory report."""

    out_dir: Path
    raw_csv: Path
    report_json: Path
    report: ts.StatReport
    files: dict[str, Path]


def build_topology(cfg: ExperimentConfig) -> HardwareGraph:
    topo = cfg.topology
    if topo.kind == "chimera":
        g = chimera(topo.m, topo.tile)
    else:
        g = import_graph(topo.path)
    if topo.defects:
        g = apply_defects(g, topo.defects)
    return g


def build_embedding(
    cfg: ExperimentConfig, hardware: HardwareGraph, origin: tuple[int, int] = (0, 0)
) -> Embedding:
    spec = cfg.embedding
    if spec.source == "clique":
        return chimera_clique_embedding(hardware, spec.k, origin=origin)
    return load_embedding(spec.path, hardware)


def build_problem(spec: ProblemSpec) -> tuple[QuboModel, float]:
    """Problem QUBO plus its constant offset (zero for MC)."""
    if spec.graph_path:
        graph = load_graph(spec.graph_path)
    else:
        graph = gen_er_graph(spec.n, spec.density, spec.graph_seed)
    weights = PenaltyWeights(a=spec.a, b=spec.b)
    if spec.kind == "mc":
        return mc_qubo(graph, weights), 0.0
    model, offset = mvc_qubo(graph, weights)
    return model, offset


def _chain_policy(cfg: ExperimentConfig) -> ChainStrengthPolicy:
    cs = cfg.chain_strength
    if cs.mode == "fixed":
        return ChainStrengthPolicy("fixed", value=cs.value)
    return ChainStrengthPolicy("utc", prefactor=cs.prefactor)


def _noise_state(cfg: ExperimentConfig) -> NoiseProcessState:
    n = cfg.noise
    return NoiseProcessState.initial(
        beta_mean=n.beta_mean,
        reversion=n.reversion,
        volatility=n.volatility,
        dt=n.dt,
        beta0=n.beta0,
        floor=n.floor,
        seed=n.seed,
    )


def _call_config(cfg: ExperimentConfig) -> AnnealCallConfig:
    s = cfg.sampling
    return AnnealCallConfig(
        num_reads=s.reads,
        sweeps=s.sweeps,
        reduce_intersample_correlation=s.reduce_intersample_correlation,
        seed=s.seed,
    )


class _SubModelDecoder:
    """Per-call decoding of one embedded logical model out of a combined
    hardware program: chain majority vote, then logical energies evaluated
    in qubo.energy()'s canonical term order."""

    def __init__(
        self,
        combined: CompiledQubo,
        embedding: Embedding,
        logical_model: QuboModel,
        offset: float = 0.0,
    ):
        pos = {int(v): p for p, v in enumerate(combined.var_ids)}
        cols: list[int] = []
        indptr = [0]
        for var in sorted(embedding.chains):
            for q in embedding.chains[var]:
                cols.append(pos[q])
            indptr.append(len(cols))
        self.chain_cols = np.array(cols, dtype=np.int64)
        self.chain_indptr = np.array(indptr, dtype=np.int64)
        self.num_chains = len(embedding.chains)
        self.compiled_logical = compile_qubo(logical_model)
        self.offset = offset

    def decode(
        self, states: np.ndarray, tie_u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        logical, broken = decode_chain_batch(
            states, self.chain_indptr, self.chain_cols, tie_u
        )
        energies = energies_for_states(self.compiled_logical, logical)
        if self.offset != 0.0:
            energies = energies + self.offset
        return logical, energies, broken


class _RegionReader:
    """Reads a directly-planted sub-model (the indicator) back out of the
    combined state matrix."""

    def __init__(self, combined: CompiledQubo, model: QuboModel):
        pos = {int(v): p for p, v in enumerate(combined.var_ids)}
        self.cols = np.array([pos[v] for v in sorted(model.variables)], dtype=np.int64)
        self.compiled = compile_qubo(model)

    def energies(self, states: np.ndarray) -> np.ndarray:
        return energies_for_states(self.compiled, states[:, self.cols])


def _tie_uniforms(seed: int, call_index: int, reads: int, chains: int) -> np.ndarray:
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed, call_index, _TIE_STREAM]))
    )
    return rng.random((reads, chains))


def program_constants(cfg: ExperimentConfig) -> dict[str, float]:
    """Rebuild the combined program of a run config (no sampling) and return
    its scale constant and autoscale factor."""
    hardware = build_topology(cfg)
    emb = build_embedding(cfg, hardware)
    problem_model, _ = build_problem(cfg.problem)
    hw_problem = embed_qubo(problem_model, emb, _chain_policy(cfg))
    if cfg.indicator is None:
        raise ConfigError("config has no [indicator] section")
    region = idle_region(hardware, emb.footprint)
    indicator_model = gen_indicator(
        IndicatorSpec(kind=cfg.indicator.kind, region=region, seed=cfg.indicator.seed)
    )
    program = combine_with_indicator(hw_problem, indicator_model)
    _, scale_factor = autoscale(program.combined)
    return {
        "scale_constant": program.scale_constant,
        "autoscale_factor": scale_factor,
    }


def analyze_run(
    problem_values: np.ndarray,
    indicator_values: np.ndarray,
    acfg: AnalysisConfig,
) -> tuple[ts.StatReport, np.ndarray, np.ndarray]:
    """The comparison pipeline on a pair of per-call series.

    Headline statistics are computed on moving-averaged data (window from the
    config, re-normalized after averaging); raw-series variants are kept as
    extras.  Returns the report plus ACF/PACF of the raw problem series.
    """
    window = min(acfg.window, len(problem_values))
    p_raw_norm = ts.minmax_normalize(problem_values)
    i_raw_norm = ts.minmax_normalize(indicator_values)
    i_raw_aligned = ts.mean_align(i_raw_norm, p_raw_norm)

    p_ma = ts.minmax_normalize(ts.moving_average(problem_values, window))
    i_ma = ts.minmax_normalize(ts.moving_average(indicator_values, window))
    i_ma_aligned = ts.mean_align(i_ma, p_ma)

    extras: dict[str, float] = {
        "n_calls": float(len(problem_values)),
        "window": float(window),
        "rmsd_raw": ts.rmsd(p_raw_norm, i_raw_aligned),
    }
    report = ts.StatReport(extras=extras)
    report.rmsd = ts.rmsd(p_ma, i_ma_aligned)
    try:
        report.pearson = ts.pearson(p_ma, i_ma)
        extras["pearson_raw"] = ts.pearson(p_raw_norm, i_raw_norm)
    except AnnealmonError:
        pass  # constant series; leave correlation unset
    # bin agreement compares the normalized series directly; mean alignment
    # only feeds the RMSD
    report.bin_agreement = ts.quartile_bin_agreement(p_ma, i_ma)
    extras["bin_agreement_raw"] = ts.quartile_bin_agreement(p_raw_norm, i_raw_norm)

    lags = acfg.adf_lags if acfg.adf_lags == "auto" else int(acfg.adf_lags)
    try:
        report.adf_stat, report.adf_p = ts.adf_test(problem_values, lags)
        ind_stat, ind_p = ts.adf_test(indicator_values, lags)
        extras["adf_stat_indicator"] = ind_stat
        extras["adf_p_indicator"] = ind_p
    except AnnealmonError:
        pass  # series too short for the requested lag order

    max_lag = min(acfg.max_lag, len(problem_values) - 1)
    try:
        acf_vals = ts.acf(problem_values, max_lag)
        pacf_vals = ts.pacf(problem_values, max_lag)
    except AnnealmonError:
        acf_vals = np.array([1.0])
        pacf_vals = np.array([1.0])
    return report, acf_vals, pacf_vals


def replay_gate(
    problem_values: np.ndarray,
    indicator_values: np.ndarray,
    burn_in: int,
    tau: float,
) -> tuple[list[dict], dict, np.ndarray]:
    """Stream the per-call series through the two-phase procedure.

    Gate decisions start once burn-in is complete and the history spans a
    nonzero range; each call is gated against the history so far, then its
    indicator energy joins the history.  Returns per-call rows, a summary,
    and the normalized indicator energy (NaN while not ready).
    """
    store = BurnInStore(burn_in)
    rows: list[dict] = []
    normalized = np.full(len(indicator_values), np.nan)
    accepted: list[float] = []
    for idx, (p, e) in enumerate(zip(problem_values, indicator_values)):
        row = {
            "call": idx,
            "indicator_energy": float(e),
            "normalized_e": None,
            "percentile": None,
            "accept": None,
        }
        if store.ready and store.running_min < store.running_max:
            decision = store.gate(float(e), tau)
            row["normalized_e"] = decision.normalized_e
            row["percentile"] = decision.percentile
            row["accept"] = decision.accept
            normalized[idx] = decision.normalized_e
            if decision.accept:
                accepted.append(float(p))
        store.observe(float(e))
        rows.append(row)
    overall_mean = float(np.mean(problem_values))
    summary = {
        "calls": len(rows),
        "burn_in": burn_in,
        "tau": tau,
        "gated_calls": int(np.count_nonzero(~np.isnan(normalized))),
        "accepted_calls": len(accepted),
        "overall_mean_energy": overall_mean,
        "accepted_mean_energy": float(np.mean(accepted)) if accepted else None,
    }
    return rows, summary, normalized


def _write_gate_log(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["call", "indicator_energy", "normalized_e", "percentile", "accept"])
        for row in rows:
            writer.writerow(
                [
                    row["call"],
                    _fmt(row["indicator_energy"]),
                    "" if row["normalized_e"] is None else _fmt(row["normalized_e"]),
                    "" if row["percentile"] is None else _fmt(row["percentile"]),
                    "" if row["accept"] is None else int(row["accept"]),
                ]
            )


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_acf_csv(path: Path, acf_vals: np.ndarray, pacf_vals: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["lag", "acf", "pacf"])
        for lag, (a, p) in enumerate(zip(acf_vals, pacf_vals)):
            writer.writerow([lag, _fmt(a), _fmt(p)])


def _copy_config(cfg: ExperimentConfig, out: Path) -> Path:
    # output_dir is normalized away so artifact bytes do not depend on
    # where the run was written
    path = out / "config.ini"
    save_config(replace(cfg, output_dir="."), str(path))
    return path


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> RunArtifacts:
    """Single problem + indicator protocol; see module docstring."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    with _stage("topology"):
        hardware = build_topology(cfg)
    with _stage("embedding"):
        emb = build_embedding(cfg, hardware)
    with _stage("problem"):
        spec = cfg.problem
        problem_model, problem_offset = build_problem(spec)
        if spec.n > len(emb.chains):
            raise ConfigError(
                f"problem has {spec.n} variables but the embedding holds {len(emb.chains)}"
            )
        hw_problem = embed_qubo(problem_model, emb, _chain_policy(cfg))
    with _stage("indicator"):
        if cfg.indicator is None:
            raise ConfigError("run_experiment needs an [indicator] section")
        region = idle_region(hardware, emb.footprint)
        indicator_model = gen_indicator(
            IndicatorSpec(kind=cfg.indicator.kind, region=region, seed=cfg.indicator.seed)
        )
    with _stage("combine"):
        program = combine_with_indicator(hw_problem, indicator_model)
        scaled, scale_factor = autoscale(program.combined)
        compiled = compile_qubo(scaled)
        problem_decoder = _SubModelDecoder(compiled, emb, problem_model, problem_offset)
        indicator_reader = _RegionReader(compiled, indicator_model)

    raw_csv = out / "raw.csv"
    calls = cfg.sampling.calls
    problem_series = np.empty(calls)
    indicator_series = np.empty(calls)
    reads_csv = out / "reads.csv" if cfg.sampling.persist_reads else None
    with _stage("sampling"):
        backend = create_backend(cfg.sampling.backend, _noise_state(cfg))
        call_cfg = _call_config(cfg)
        reads_f = open(reads_csv, "w", encoding="utf-8", newline="") if reads_csv else None
        try:
            reads_writer = None
            if reads_f is not None:
                reads_writer = csv.writer(reads_f)
                reads_writer.writerow(["call", "read", "problem_energy", "indicator_energy"])
            with open(raw_csv, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(
                    ["call", "beta", "problem_energy", "indicator_energy", "broken_fraction"]
                )
                for c in range(calls):
                    batch = backend.sample(compiled, call_cfg)
                    tie_u = _tie_uniforms(
                        cfg.sampling.seed, batch.call_index, batch.num_reads,
                        problem_decoder.num_chains,
                    )
                    _, p_energies, broken = problem_decoder.decode(batch.states, tie_u)
                    i_energies = indicator_reader.energies(batch.states)
                    problem_series[c] = np.mean(p_energies)
                    indicator_series[c] = np.mean(i_energies)
                    writer.writerow(
                        [
                            c,
                            _fmt(batch.beta_used),
                            _fmt(problem_series[c]),
                            _fmt(indicator_series[c]),
                            _fmt(float(np.mean(broken))),
                        ]
                    )
                    f.flush()
                    if reads_writer is not None:
                        for r in range(batch.num_reads):
                            reads_writer.writerow(
                                [c, r, _fmt(p_energies[r]), _fmt(i_energies[r])]
                            )
        finally:
            if reads_f is not None:
                reads_f.close()

    with _stage("analysis"):
        report, acf_vals, pacf_vals = analyze_run(
            problem_series, indicator_series, cfg.analysis
        )
        report.extras["scale_constant"] = program.scale_constant
        report.extras["autoscale_factor"] = scale_factor
        report_json = out / "report.json"
        report.save_json(str(report_json))
        acf_csv = out / "acf_pacf.csv"
        _write_acf_csv(acf_csv, acf_vals, pacf_vals)

    with _stage("gate"):
        rows, summary, normalized = replay_gate(
            problem_series, indicator_series, cfg.analysis.burn_in, cfg.analysis.tau
        )
        gate_log = out / "gate_log.csv"
        _write_gate_log(gate_log, rows)
        gate_summary = out / "gate_summary.json"

    with _stage("stratify"):
        mask = ~np.isnan(normalized)
        strat = stratify(
            problem_series[mask],
            normalized[mask],
            cfg.analysis.strat_low,
            cfg.analysis.strat_high,
        )
        strat_csv = out / "stratified.csv"
        with open(strat_csv, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["stratum", "problem_energy"])
            for v in strat.low_set:
                writer.writerow(["low", _fmt(v)])
            for v in strat.high_set:
                writer.writerow(["high", _fmt(v)])
        summary["low_mean_energy"] = (
            float(np.mean(strat.low_set)) if strat.low_set.size else None
        )
        summary["high_mean_energy"] = (
            float(np.mean(strat.high_set)) if strat.high_set.size else None
        )
        summary["low_count"] = int(strat.low_set.size)
        summary["high_count"] = int(strat.high_set.size)
        _write_json(gate_summary, summary)

    config_copy = _copy_config(cfg, out)
    files = {
        "gate_log": gate_log,
        "gate_summary": gate_summary,
        "stratified": strat_csv,
        "acf_pacf": acf_csv,
        "config": config_copy,
    }
    if reads_csv is not None:
        files["reads"] = reads_csv
    return RunArtifacts(
        out_dir=out,
        raw_csv=raw_csv,
        report_json=report_json,
        report=report,
        files=files,
    )


def _quadrant_origins(m: int) -> list[tuple[int, int]]:
    half = m // 2
    return [(0, 0), (0, half), (half, 0), (half, half)]


def run_parallel_trend(cfg: ExperimentConfig, out_dir: str | None = None) -> RunArtifacts:
    """Four disjoint problems sampled in the same calls, one per chip
    quadrant; ADF per raw series plus pairwise correlation of the smoothed
    series."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    with _stage("topology"):
        hardware = build_topology(cfg)
        if cfg.topology.kind != "chimera" or cfg.topology.m < 2 or cfg.topology.m % 2:
            raise ConfigError("parallel trend needs a generated chimera graph with even m")
    with _stage("problem"):
        if len(cfg.problems) != 4:
            raise ConfigError(f"parallel trend needs 4 problem sections, got {len(cfg.problems)}")
        problems = [build_problem(spec) for spec in cfg.problems]
    with _stage("embedding"):
        origins = _quadrant_origins(cfg.topology.m)
        embeddings = []
        footprints: set[int] = set()
        for spec, origin in zip(cfg.problems, origins):
            emb = chimera_clique_embedding(hardware, spec.n, origin=origin)
            if footprints & emb.footprint:
                raise ConfigError("quadrant embeddings overlap")
            footprints |= emb.footprint
            embeddings.append(emb)
    with _stage("combine"):
        policy = _chain_policy(cfg)
        union_lin: dict[int, float] = {}
        union_quad: dict[tuple[int, int], float] = {}
        union_vars: set[int] = set()
        hw_models = []
        for (model, _), emb in zip(problems, embeddings):
            hw = embed_qubo(model, emb, policy)
            hw_models.append(hw)
            union_lin.update(hw.linear)
            union_quad.update(hw.quadratic)
            union_vars |= hw.variables
        union = QuboModel.from_terms(union_lin, union_quad, variables=union_vars)
        compiled = compile_qubo(union)
        decoders = [
            _SubModelDecoder(compiled, emb, model, offset)
            for (model, offset), emb in zip(problems, embeddings)
        ]

    calls = cfg.sampling.calls
    series = np.empty((4, calls))
    raw_csv = out / "trend_raw.csv"
    with _stage("sampling"):
        backend = create_backend(cfg.sampling.backend, _noise_state(cfg))
        call_cfg = _call_config(cfg)
        with open(raw_csv, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["call", "beta"] + [f"energy_{i + 1}" for i in range(4)])
            for c in range(calls):
                batch = backend.sample(compiled, call_cfg)
                row = [c, _fmt(batch.beta_used)]
                for i, decoder in enumerate(decoders):
                    tie_u = _tie_uniforms(
                        cfg.sampling.seed + i + 1,
                        batch.call_index,
                        batch.num_reads,
                        decoder.num_chains,
                    )
                    _, energies, _ = decoder.decode(batch.states, tie_u)
                    series[i, c] = np.mean(energies)
                    row.append(_fmt(series[i, c]))
                writer.writerow(row)
                f.flush()

    with _stage("analysis"):
        window = min(cfg.analysis.window, calls)
        lags = cfg.analysis.adf_lags if cfg.analysis.adf_lags == "auto" else int(cfg.analysis.adf_lags)
        payload: dict[str, float] = {"n_calls": float(calls), "window": float(window)}
        smoothed = [ts.moving_average(series[i], window) for i in range(4)]
        for i in range(4):
            try:
                stat, p = ts.adf_test(series[i], lags)
                payload[f"adf_stat_{i + 1}"] = stat
                payload[f"adf_p_{i + 1}"] = p
            except AnnealmonError:
                pass
        for i in range(4):
            for j in range(i + 1, 4):
                payload[f"pearson_ma_{i + 1}_{j + 1}"] = ts.pearson(smoothed[i], smoothed[j])
        report = ts.StatReport(extras=payload)
        report_json = out / "trend_report.json"
        report.save_json(str(report_json))
        ma_csv = out / "trend_ma.csv"
        with open(ma_csv, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow([f"ma_{i + 1}" for i in range(4)])
            for row_vals in zip(*smoothed):
                writer.writerow([_fmt(v) for v in row_vals])

    config_copy = _copy_config(cfg, out)
    return RunArtifacts(
        out_dir=out,
        raw_csv=raw_csv,
        report_json=report_json,
        report=report,
        files={"trend_ma": ma_csv, "config": config_copy},
    )


def run_alternating(cfg: ExperimentConfig, out_dir: str | None = None) -> RunArtifacts:
    """Two problems of equal size mapped onto one embedding in alternation
    while the indicator stays fixed; the indicator's energy distribution is
    compared between the two accompaniments with a two-sample KS test."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    with _stage("topology"):
        hardware = build_topology(cfg)
    with _stage("embedding"):
        emb = build_embedding(cfg, hardware)
    with _stage("problem"):
        if len(cfg.problems) != 2:
            raise ConfigError(f"alternating run needs 2 problem sections, got {len(cfg.problems)}")
        if cfg.problems[0].n != cfg.problems[1].n:
            raise ConfigError("alternating problems must have the same size")
        problems = [build_problem(spec) for spec in cfg.problems]
    with _stage("indicator"):
        if cfg.indicator is None:
            raise ConfigError("alternating run needs an [indicator] section")
        region = idle_region(hardware, emb.footprint)
        indicator_model = gen_indicator(
            IndicatorSpec(kind=cfg.indicator.kind, region=region, seed=cfg.indicator.seed)
        )
    with _stage("combine"):
        policy = _chain_policy(cfg)
        programs = []
        for model, offset in problems:
            hw = embed_qubo(model, emb, policy)
            combined = combine_with_indicator(hw, indicator_model)
            scaled, _ = autoscale(combined.combined)
            compiled = compile_qubo(scaled)
            programs.append(
                (
                    compiled,
                    _SubModelDecoder(compiled, emb, model, offset),
                    _RegionReader(compiled, indicator_model),
                )
            )

    calls = cfg.sampling.calls
    tags = np.empty(calls, dtype=np.int64)
    problem_series = np.empty(calls)
    indicator_series = np.empty(calls)
    raw_csv = out / "alternate_raw.csv"
    with _stage("sampling"):
        backend = create_backend(cfg.sampling.backend, _noise_state(cfg))
        call_cfg = _call_config(cfg)
        with open(raw_csv, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["call", "tag", "beta", "problem_energy", "indicator_energy"])
            for c in range(calls):
                tag = c % 2
                compiled, decoder, reader = programs[tag]
                batch = backend.sample(compiled, call_cfg)
                tie_u = _tie_uniforms(
                    cfg.sampling.seed, batch.call_index, batch.num_reads,
                    decoder.num_chains,
                )
                _, p_energies, _ = decoder.decode(batch.states, tie_u)
                tags[c] = tag
                problem_series[c] = np.mean(p_energies)
                indicator_series[c] = np.mean(reader.energies(batch.states))
                writer.writerow(
                    [
                        c,
                        tag,
                        _fmt(batch.beta_used),
                        _fmt(problem_series[c]),
                        _fmt(indicator_series[c]),
                    ]
                )
                f.flush()

    with _stage("analysis"):
        set_a = indicator_series[tags == 0]
        set_b = indicator_series[tags == 1]
        ks_stat, ks_p = ts.ks_two_sample(set_a, set_b)
        report = ts.StatReport(
            ks_stat=ks_stat,
            ks_p=ks_p,
            extras={
                "n_calls": float(calls),
                "indicator_mean_a": float(np.mean(set_a)),
                "indicator_mean_b": float(np.mean(set_b)),
            },
        )
        report_json = out / "alternate_report.json"
        report.save_json(str(report_json))

    config_copy = _copy_config(cfg, out)
    return RunArtifacts(
        out_dir=out,
        raw_csv=raw_csv,
        report_json=report_json,
        report=report,
        files={"config": config_copy},
    )


def load_raw_series(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Problem and indicator per-call series from a run's raw CSV."""
    problems: list[float] = []
    indicators: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            problems.append(float(row["problem_energy"]))
            indicators.append(float(row["indicator_energy"]))
    return np.asarray(problems), np.asarray(indicators)


EXPORT_KINDS = ("timeseries", "histogram", "agreement")


def export_plot_data(artifacts_dir: str, which: str, out_dir: str | None = None) -> Path:
    """Emit a tidy CSV for plotting from a finished run's artifacts.

    timeseries: aligned normalized moving-averaged pair
    histogram:  shared-edge bin counts of the two noise strata
    agreement:  same/different quartile-bin proportions, raw and smoothed
    """
    src = Path(artifacts_dir)
    dst = Path(out_dir) if out_dir else src
    dst.mkdir(parents=True, exist_ok=True)
    if which not in EXPORT_KINDS:
        raise ConfigError(f"unknown plot id {which!r}; known: {EXPORT_KINDS}")

    from .config import load_config

    cfg = load_config(str(src / "config.ini"))

    if which == "timeseries":
        problem_values, indicator_values = load_raw_series(str(src / "raw.csv"))
        window = min(cfg.analysis.window, len(problem_values))
        p_ma = ts.minmax_normalize(ts.moving_average(problem_values, window))
        i_ma = ts.minmax_normalize(ts.moving_average(indicator_values, window))
        i_aligned = ts.mean_align(i_ma, p_ma)
        path = dst / "timeseries.csv"
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["problem_norm", "indicator_norm"])
            for a, b in zip(p_ma, i_aligned):
                writer.writerow([_fmt(a), _fmt(b)])
        return path

    if which == "histogram":
        lows: list[float] = []
        highs: list[float] = []
        with open(src / "stratified.csv", "r", encoding="utf-8", newline="") as f:
            for row in csv.DictReader(f):
                (lows if row["stratum"] == "low" else highs).append(
                    float(row["problem_energy"])
                )
        merged = np.asarray(lows + highs)
        if merged.size == 0:
            raise ConfigError("stratified data is empty; nothing to export")
        edges = np.histogram_bin_edges(merged, bins=20)
        low_counts, _ = np.histogram(np.asarray(lows), bins=edges)
        high_counts, _ = np.histogram(np.asarray(highs), bins=edges)
        path = dst / "histogram.csv"
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["bin_left", "bin_right", "low_count", "high_count"])
            for i in range(len(edges) - 1):
                writer.writerow(
                    [_fmt(edges[i]), _fmt(edges[i + 1]), int(low_counts[i]), int(high_counts[i])]
                )
        return path

    # agreement
    problem_values, indicator_values = load_raw_series(str(src / "raw.csv"))
    window = min(cfg.analysis.window, len(problem_values))
    p_raw = ts.minmax_normalize(problem_values)
    i_raw = ts.minmax_normalize(indicator_values)
    p_ma = ts.minmax_normalize(ts.moving_average(problem_values, window))
    i_ma = ts.minmax_normalize(ts.moving_average(indicator_values, window))
    same_raw = ts.quartile_bin_agreement(p_raw, i_raw)
    same_ma = ts.quartile_bin_agreement(p_ma, i_ma)
    path = dst / "agreement.csv"
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["series", "same", "different"])
        writer.writerow(["raw", _fmt(same_raw), _fmt(1.0 - same_raw)])
        writer.writerow(["moving_average", _fmt(same_ma), _fmt(1.0 - same_ma)])
    return path

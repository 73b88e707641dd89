"""Orquestração: configuração -> parâmetros -> execução -> relatório.

Recebe dicionários já convertidos por ``config_gateway`` e devolve
resultados prontos para exportação. Erros de domínio nos parâmetros viram
``ConfigError`` (são erros de configuração do usuário); falhas numéricas
durante a execução propagam como estão.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

import numpy as np
from django.conf import settings

from core.exceptions import ConfigError, DomainError
from core.services import food_chain
from core.services.fluid_congestion import (
    FluidModel,
    FluidParams,
    FluidState,
    SweepResult,
    convergence_sweep,
    default_params,
    fluid_field,
    run_fluid,
)
from core.services.metrics_service import (
    Comparison,
    MetricsReport,
    compare_reports,
    report_from_trace,
    report_from_trajectory,
)
from core.services.ode_integrator import IntegratorConfig, Trajectory, integrate
from core.services.packet_sim import ScenarioConfig, Trace, build_dumbbell

logger = logging.getLogger(__name__)

DURACAO_PADRAO = 200.0
T_END_CADEIA = 20.0
FILA_PADRAO = 10

_CAMPOS_FLUIDOS = ("alpha", "beta", "delta", "epsilon", "b", "eta", "C_C", "C_W",
                   "B_eff", "phi", "theta")


def _lab(chave: str) -> Any:
    return settings.BICC_LAB[chave]


@dataclass(frozen=True)
class FluidRun:
    model: FluidModel
    params: FluidParams
    state0: FluidState
    trajectory: Trajectory
    residual: float
    report: MetricsReport
    echo: dict[str, Any]
    sweep: SweepResult | None = None


@dataclass(frozen=True)
class SimRun:
    scenario: ScenarioConfig
    trace: Trace
    report: MetricsReport
    echo: dict[str, Any]
    rejected_headers: int


@dataclass(frozen=True)
class ComparisonRun:
    runs: tuple[FluidRun, FluidRun]
    comparison: Comparison


@dataclass(frozen=True)
class FoodChainRun:
    model: str
    trajectory: Trajectory
    drift: float | None
    echo: dict[str, Any]


def _por_fluxo(cfg: Mapping[str, Any], chave: str, k: int, erros: dict[str, str]) -> tuple[float, ...] | None:
    valores = cfg.get(chave)
    if valores is None:
        return None
    if len(valores) == 1:
        return tuple(valores) * k
    if len(valores) != k:
        erros[chave] = f"esperados 1 ou {k} valores, recebidos {len(valores)}"
        return None
    return tuple(valores)


def build_fluid_params(cfg: Mapping[str, Any]) -> FluidParams:
    '''Parametrização canônica para (B, k) com as chaves do arquivo por cima.'''
    erros: dict[str, str] = {}
    B, k = cfg.get("B"), cfg.get("k")
    if B is None:
        erros["B"] = "chave obrigatória ausente"
    elif not (math.isfinite(B) and B > 0):
        erros["B"] = f"deve ser positivo: {B!r}"
    if k is None:
        erros["k"] = "chave obrigatória ausente"
    elif k < 1:
        erros["k"] = f"deve ser inteiro >= 1: {k!r}"
    if erros:
        raise ConfigError(erros)

    base = default_params(B, k)
    mudancas: dict[str, Any] = {c: float(cfg[c]) for c in _CAMPOS_FLUIDOS if c in cfg}
    for chave in ("a", "c"):
        valores = _por_fluxo(cfg, chave, base.k, erros)
        if valores is not None:
            mudancas[chave] = valores
    if erros:
        raise ConfigError(erros)

    try:
        return replace(base, **mudancas)
    except DomainError as exc:
        raise ConfigError({"params": str(exc)}) from exc


def build_initial_state(cfg: Mapping[str, Any], params: FluidParams) -> FluidState:
    erros: dict[str, str] = {}
    janelas = _por_fluxo(cfg, "initial_W", params.k, erros)
    if erros:
        raise ConfigError(erros)
    estado = FluidState(
        C=float(cfg.get("initial_C", params.B)),
        Q=float(cfg.get("initial_Q", params.B)),
        W=janelas if janelas is not None else (1.0,) * params.k,
    )
    try:
        estado.validate()
    except DomainError as exc:
        raise ConfigError({"initial_state": str(exc)}) from exc
    return estado


def build_integrator_config(cfg: Mapping[str, Any], t_end_key: str = "duration",
                            t_end_default: float = DURACAO_PADRAO) -> IntegratorConfig:
    try:
        return IntegratorConfig(
            dt=float(cfg.get("dt", _lab("DEFAULT_DT"))),
            t_end=float(cfg.get(t_end_key, t_end_default)),
            method=cfg.get("method", "rk4-fixed"),
            tolerance=float(cfg.get("tolerance", _lab("DEFAULT_TOLERANCE"))),
            max_halvings=int(cfg.get("max_halvings", _lab("MAX_HALVINGS"))),
        )
    except DomainError as exc:
        raise ConfigError({"integrator": str(exc)}) from exc


def _eco_fluido(params: FluidParams, estado: FluidState, integrador: IntegratorConfig,
                model: FluidModel, extras: Mapping[str, Any]) -> dict[str, Any]:
    eco: dict[str, Any] = {"model": model.value, "B": params.B, "k": params.k}
    eco.update({c.name: getattr(params, c.name) for c in fields(params) if c.name not in ("B", "k")})
    eco.update(
        initial_C=estado.C,
        initial_Q=estado.Q,
        initial_W=estado.W,
        duration=integrador.t_end,
        dt=integrador.dt,
        method=integrador.method.value,
        tolerance=integrador.tolerance,
        max_halvings=integrador.max_halvings,
    )
    eco.update(extras)
    return eco


def run_fluid_scenario(cfg: Mapping[str, Any]) -> FluidRun:
    model = FluidModel(cfg.get("model", FluidModel.ETTBICC.value))
    params = build_fluid_params(cfg)
    estado = build_initial_state(cfg, params)
    integrador = build_integrator_config(cfg)

    trajetoria = run_fluid(params, estado, integrador, model)
    final = trajetoria.final_state
    campo = fluid_field(params, model)
    residual = float(np.linalg.norm(campo(final.tolist(), integrador.t_end)))
    relatorio = report_from_trajectory(
        trajetoria, params.B, _lab("STEADY_FRACTION"), _lab("CONVERGENCE_BAND")
    )

    extras: dict[str, Any] = {}
    varredura = None
    if cfg.get("sweep_starts"):
        horizonte = cfg.get("sweep_horizon", integrador.t_end)
        extras = {
            "sweep_starts": cfg["sweep_starts"],
            "seed": cfg.get("seed", 0),
            "residual_tol": cfg.get("residual_tol", _lab("RESIDUAL_TOL")),
            "sweep_horizon": horizonte,
            "sweep_max_horizon": cfg.get("sweep_max_horizon", horizonte),
        }
        try:
            varredura = convergence_sweep(
                params, extras["sweep_starts"], extras["seed"], horizonte,
                integrador.dt, extras["residual_tol"], model,
                max_horizon=extras["sweep_max_horizon"],
            )
        except DomainError as exc:
            raise ConfigError({"sweep_starts": str(exc)}) from exc

    logger.info(
        "Execução fluida %s concluída: %d amostras, estado final %s, resíduo %.3e",
        model.value, len(trajetoria), np.round(final, 6).tolist(), residual,
    )
    return FluidRun(
        model=model,
        params=params,
        state0=estado,
        trajectory=trajetoria,
        residual=residual,
        report=relatorio,
        echo=_eco_fluido(params, estado, integrador, model, extras),
        sweep=varredura,
    )


def build_scenario_config(cfg: Mapping[str, Any]) -> ScenarioConfig:
    if cfg.get("model", FluidModel.ETTBICC.value) != FluidModel.ETTBICC.value:
        raise ConfigError({"model": "o simulador de pacotes só implementa ettbicc"})
    params = build_fluid_params(cfg)
    estado = build_initial_state(cfg, params)
    return ScenarioConfig(
        k=params.k,
        B=params.B,
        access_bw=float(cfg.get("access_bw", 2.0 * params.B)),
        rtt=float(cfg.get("rtt", 1.0)),
        queue_capacity=int(cfg.get("queue_capacity", FILA_PADRAO)),
        duration=float(cfg.get("duration", DURACAO_PADRAO)),
        initial_W=estado.W,
        initial_C=estado.C,
        initial_Q=estado.Q,
        seed=int(cfg.get("seed", 0)),
        params=params,
    )


def run_sim_scenario(cfg: Mapping[str, Any]) -> SimRun:
    cenario = build_scenario_config(cfg)
    simulacao = build_dumbbell(cenario)
    traco = simulacao.run(cenario.duration)
    relatorio = report_from_trace(
        traco, cenario.B, _lab("STEADY_FRACTION"), _lab("CONVERGENCE_BAND")
    )

    params = cenario.fluid_params()
    eco: dict[str, Any] = {"B": params.B, "k": params.k}
    eco.update({c.name: getattr(params, c.name) for c in fields(params) if c.name not in ("B", "k")})
    eco.update(
        initial_C=cenario.initial_C,
        initial_Q=cenario.initial_Q,
        initial_W=cenario.initial_W,
        duration=cenario.duration,
        access_bw=cenario.access_bw,
        rtt=cenario.rtt,
        queue_capacity=cenario.queue_capacity,
        seed=cenario.seed,
    )
    return SimRun(
        scenario=cenario,
        trace=traco,
        report=relatorio,
        echo=eco,
        rejected_headers=sum(s.rejected for s in simulacao.senders),
    )


def run_comparison(
    cfg_a: Mapping[str, Any],
    cfg_b: Mapping[str, Any],
    labels: tuple[str, str] | None = None,
) -> ComparisonRun:
    '''Roda os dois cenários fluidos e compara os relatórios (deltas = b - a).'''
    execucao_a = run_fluid_scenario(cfg_a)
    execucao_b = run_fluid_scenario(cfg_b)

    if labels is None:
        labels = (execucao_a.model.value, execucao_b.model.value)
    if labels[0] == labels[1]:
        labels = (f"{labels[0]}_A", f"{labels[1]}_B")

    comparacao = compare_reports(execucao_a.report, execucao_b.report, labels)
    logger.info("Comparação %s x %s: %s", labels[0], labels[1], comparacao.verdict)
    return ComparisonRun(runs=(execucao_a, execucao_b), comparison=comparacao)


_PARAMS_CADEIA: dict[str, tuple[type, tuple[str, ...], int]] = {
    "lotka_volterra": (food_chain.LotkaVolterraParams, ("a", "b", "c", "h"), 2),
    "logistic": (food_chain.LotkaVolterraParams, ("a", "b", "c", "h", "C_r"), 2),
    "prey_dependent": (
        food_chain.TriTrophicParams,
        ("alpha", "beta", "C_p", "a", "C_r", "epsilon", "b", "c", "h"), 3,
    ),
    "ratio_dependent": (
        food_chain.TriTrophicParams,
        ("alpha", "beta", "C_p", "a", "C_r", "epsilon", "b", "c", "h"), 3,
    ),
}

_CAMPOS_CADEIA = {
    "lotka_volterra": food_chain.lotka_volterra_field,
    "logistic": food_chain.lotka_volterra_field,
    "prey_dependent": food_chain.prey_dependent_field,
    "ratio_dependent": food_chain.ratio_dependent_field,
}

_NOMES_CADEIA = {2: ("r", "f"), 3: ("p", "r", "f")}


def lotka_volterra_drift(params: food_chain.LotkaVolterraParams, trajectory: Trajectory) -> float:
    '''Maior desvio relativo da integral primeira ao longo da trajetória.'''
    valores = np.array([
        food_chain.lotka_volterra_first_integral(params, r, f)
        for r, f in trajectory.states
    ])
    return float(np.max(np.abs(valores - valores[0])) / abs(valores[0]))


def run_foodchain(cfg: Mapping[str, Any]) -> FoodChainRun:
    model = cfg["model"]
    classe, obrigatorias, dimensao = _PARAMS_CADEIA[model]
    opcionais = ("m1", "m2", "n1", "n2") if dimensao == 3 else ()

    erros = {c: f"obrigatória para o modelo {model}" for c in obrigatorias if c not in cfg}
    sobrando = sorted(
        c for c in cfg
        if c in food_chain_param_keys() and c not in obrigatorias + opcionais
    )
    erros.update({c: f"não se aplica ao modelo {model}" for c in sobrando})
    inicial = cfg.get("initial")
    if inicial is None or len(inicial) != dimensao:
        erros["initial"] = f"esperados {dimensao} valores"
    if erros:
        raise ConfigError(erros)

    argumentos = {c: cfg[c] for c in obrigatorias + opcionais if c in cfg}
    try:
        params = classe(**argumentos)
        for nome, valor in zip(_NOMES_CADEIA[dimensao], inicial):
            if not (math.isfinite(valor) and valor >= 0):
                raise DomainError(f"População {nome} inválida: {valor!r}")
    except DomainError as exc:
        raise ConfigError({"params": str(exc)}) from exc

    integrador = build_integrator_config(cfg, "t_end", T_END_CADEIA)
    trajetoria = integrate(
        _CAMPOS_CADEIA[model](params), inicial, integrador, names=_NOMES_CADEIA[dimensao]
    )

    deriva = None
    if model == "lotka_volterra" and all(v > 0 for v in inicial):
        deriva = lotka_volterra_drift(params, trajetoria)

    eco: dict[str, Any] = {"model": model, **argumentos}
    eco.update(
        initial=tuple(inicial),
        t_end=integrador.t_end,
        dt=integrador.dt,
        method=integrador.method.value,
        tolerance=integrador.tolerance,
        max_halvings=integrador.max_halvings,
    )
    logger.info(
        "Cadeia %s integrada até t=%s: estado final %s%s",
        model, integrador.t_end, np.round(trajetoria.final_state, 6).tolist(),
        "" if deriva is None else f", deriva da integral primeira {deriva:.3e}",
    )
    return FoodChainRun(model=model, trajectory=trajetoria, drift=deriva, echo=eco)


def food_chain_param_keys() -> frozenset[str]:
    chaves = {c for _, obrigatorias, _ in _PARAMS_CADEIA.values() for c in obrigatorias}
    return frozenset(chaves | {"m1", "m2", "n1", "n2"})

"""Modelo fluido do controle de congestionamento tri-trófico.

Estado ``(C, Q, W1..Wk)``: capacidade virtual, fila virtual e janelas de
congestionamento, todos em pacotes. Dois lados direitos:

- ETTBICC, versão dependente da razão (modelo principal);
- TTBICC, versão dependente da presa (linha de base para comparação).

Todas as frações usam a convenção 0/0 -> 0, o que mantém os eixos
absorventes. Funções puras: cenários independentes podem rodar em paralelo.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from core.exceptions import DomainError
from core.services.fracoes import razao
from core.services.ode_integrator import (
    IntegrationMethod,
    IntegratorConfig,
    Trajectory,
    integrate,
)

logger = logging.getLogger(__name__)

Rhs = Callable[[Sequence[float], float], list[float]]


class FluidModel(str, Enum):
    ETTBICC = "ettbicc"
    TTBICC = "ttbicc"


@dataclass(frozen=True, slots=True)
class FluidParams:
    '''Parâmetros do modelo fluido.

    ``phi`` e ``theta`` aparecem na parametrização publicada mas não nas
    equações; ficam aqui apenas para eco e reprodutibilidade.
    '''

    k: int
    B: float
    alpha: float
    beta: float
    delta: float
    a: tuple[float, ...]
    epsilon: float
    b: float
    c: tuple[float, ...]
    eta: float
    C_C: float
    C_W: float
    B_eff: float
    phi: float = 1.0
    theta: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))

        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k deve ser inteiro >= 1: {self.k!r}")
        escalares = ("B", "alpha", "beta", "delta", "epsilon", "b", "eta",
                     "C_C", "C_W", "B_eff")
        for nome in escalares:
            valor = getattr(self, nome)
            if not (math.isfinite(valor) and valor > 0):
                raise DomainError(f"{nome} deve ser estritamente positivo: {valor!r}")
        if len(self.a) != self.k or len(self.c) != self.k:
            raise DomainError(
                f"a e c devem ter {self.k} elementos (a={len(self.a)}, c={len(self.c)})"
            )
        if any(not (math.isfinite(v) and v > 0) for v in self.a + self.c):
            raise DomainError("Todos os a_i e c_i devem ser estritamente positivos")
        if self.B_eff > self.B:
            raise DomainError(f"B_eff ({self.B_eff}) não pode exceder B ({self.B})")
        if not (self.B / self.k <= self.C_W <= self.B):
            logger.warning(
                "C_W=%s fora do intervalo [B/k, B] = [%s, %s]",
                self.C_W, self.B / self.k, self.B,
            )


@dataclass(frozen=True, slots=True)
class FluidState:
    C: float
    Q: float
    W: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.W)

    def as_vector(self) -> np.ndarray:
        return np.array([self.C, self.Q, *self.W], dtype=float)

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "FluidState":
        return cls(C=float(x[0]), Q=float(x[1]), W=tuple(float(v) for v in x[2:]))

    def validate(self) -> None:
        valores = (self.C, self.Q, *self.W)
        if not all(math.isfinite(v) for v in valores):
            raise DomainError(f"Estado não finito: {self}")
        if any(v < 0 for v in valores):
            raise DomainError(f"Estado com componente negativa: {self}")


@dataclass(frozen=True, slots=True)
class FluidRates:
    '''Derivada temporal de um FluidState.'''

    dC: float
    dQ: float
    dW: tuple[float, ...]


@dataclass(frozen=True)
class EquilibriumResult:
    state: FluidState
    converged: bool
    residual: float
    variation: float
    elapsed: float = 0.0
    trajectory: Trajectory | None = None


@dataclass(frozen=True)
class SweepResult:
    results: list[EquilibriumResult]
    fixed_point: np.ndarray
    spread: np.ndarray

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.results)


def effective_capacity(B: float) -> float:
    '''Capacidade usada no termo min(·): B − 1 para B inteiro, B − B/50 caso contrário.'''
    B = float(B)
    if B.is_integer() and B > 1.0:
        return B - 1.0
    return B - B / 50.0


def default_params(B: float, k: int) -> FluidParams:
    """Parametrização canônica.

    alpha = 1 (e não B) para reproduzir o sistema instanciado do exemplo
    com B = 50; continua configurável.
    """
    if not B > 0:
        raise DomainError(f"B deve ser positivo: {B!r}")
    if int(k) != k or k < 1:
        raise DomainError(f"k deve ser inteiro >= 1: {k!r}")
    k = int(k)
    return FluidParams(
        k=k,
        B=float(B),
        alpha=1.0,
        beta=0.5,
        delta=1.0,
        a=(1.0,) * k,
        epsilon=0.5,
        b=1.0,
        c=(1.0,) * k,
        eta=1.0,
        C_C=float(B),
        C_W=B / 2.0,
        B_eff=effective_capacity(B),
    )


def state_names(k: int) -> tuple[str, ...]:
    return ("C", "Q", *(f"W{i}" for i in range(1, k + 1)))


def fluid_field(params: FluidParams, model: FluidModel | str = FluidModel.ETTBICC) -> Rhs:
    '''Campo vetorial sobre ``[C, Q, W1..Wk]`` pronto para o integrador.'''
    model = FluidModel(model)
    alpha, beta, delta = params.alpha, params.beta, params.delta
    epsilon, b, eta = params.epsilon, params.b, params.eta
    C_C, C_W, B_eff = params.C_C, params.C_W, params.B_eff
    a, c = params.a, params.c

    def ettbicc(x: Sequence[float], t: float) -> list[float]:
        C, Q, *W = x
        soma_w = sum(W)
        soma_cw = sum(ci * w for ci, w in zip(c, W))

        dC = C * (alpha * (1.0 - C / C_C) - beta * sum(razao(w, C + w) for w in W))
        M = min(B_eff, Q + soma_w)
        dQ = Q * (razao(soma_cw, Q + soma_cw) - eta * razao(M, Q + M))
        dW = [
            w * (ai * (1.0 - w / C_W) + epsilon * razao(C, C + w) - b * razao(Q, Q + w))
            for ai, w in zip(a, W)
        ]
        return [dC, dQ, *dW]

    def ttbicc(x: Sequence[float], t: float) -> list[float]:
        C, Q, *W = x
        soma_w = sum(W)
        soma_cw = sum(ci * w for ci, w in zip(c, W))

        dC = C * (alpha * (1.0 - C / C_C) - beta * soma_w) * delta
        h = min(B_eff, Q + soma_w)
        dQ = Q * (soma_cw - h) * delta
        dW = [w * (ai * (1.0 - w / C_W) + epsilon * C - b * Q) for ai, w in zip(a, W)]
        return [dC, dQ, *dW]

    return ettbicc if model is FluidModel.ETTBICC else ttbicc


def _avaliar(params: FluidParams, state: FluidState, model: FluidModel) -> FluidRates:
    if state.k != params.k:
        raise DomainError(f"Estado com {state.k} janelas para k={params.k}")
    x = [state.C, state.Q, *state.W]
    if not all(math.isfinite(v) for v in x):
        raise DomainError(f"Estado não finito: {state}")
    dC, dQ, *dW = fluid_field(params, model)(x, 0.0)
    return FluidRates(dC=dC, dQ=dQ, dW=tuple(dW))


def ettbicc_rhs(params: FluidParams, state: FluidState) -> FluidRates:
    return _avaliar(params, state, FluidModel.ETTBICC)


def ttbicc_rhs(params: FluidParams, state: FluidState) -> FluidRates:
    return _avaliar(params, state, FluidModel.TTBICC)


def kink_guard(params: FluidParams, dt: float) -> Callable[[Sequence[float], float], bool]:
    '''Verdadeiro perto da quina de min(B_eff, Q + ΣW).'''
    limiar = dt * params.B
    B_eff = params.B_eff

    def perto_da_quina(x: Sequence[float], t: float) -> bool:
        return abs(x[1] + sum(x[2:]) - B_eff) < limiar

    return perto_da_quina


def run_fluid(
    params: FluidParams,
    state0: FluidState,
    config: IntegratorConfig,
    model: FluidModel | str = FluidModel.ETTBICC,
) -> Trajectory:
    if state0.k != params.k:
        raise DomainError(f"Estado inicial com {state0.k} janelas para k={params.k}")
    state0.validate()
    model = FluidModel(model)
    refine = None
    if config.method is IntegrationMethod.RK4_FIXED:
        refine = kink_guard(params, config.dt)

    logger.info(
        "Integrando %s: k=%d, B=%s, t_end=%s, dt=%s, método=%s",
        model.value, params.k, params.B, config.t_end, config.dt, config.method.value,
    )
    return integrate(
        fluid_field(params, model),
        state0.as_vector(),
        config,
        names=state_names(params.k),
        refine=refine,
    )


def _residuo(params: FluidParams, model: FluidModel, x: np.ndarray) -> float:
    return float(np.linalg.norm(fluid_field(params, model)(x.tolist(), 0.0)))


def _juntar(partes: list[Trajectory]) -> Trajectory:
    '''Concatena trechos consecutivos, deslocando os tempos e sem repetir as emendas.'''
    tempos, estados = [partes[0].times], [partes[0].states]
    deslocamento = float(partes[0].times[-1])
    for parte in partes[1:]:
        tempos.append(parte.times[1:] + deslocamento)
        estados.append(parte.states[1:])
        deslocamento += float(parte.times[-1])
    return Trajectory(
        times=np.concatenate(tempos), states=np.vstack(estados), names=partes[0].names
    )


def find_equilibrium(
    params: FluidParams,
    state0: FluidState,
    horizon: float,
    residual_tol: float,
    model: FluidModel | str = FluidModel.ETTBICC,
    dt: float = 0.01,
    method: IntegrationMethod | str = IntegrationMethod.RK4_FIXED,
    tolerance: float = 1e-8,
    max_horizon: float | None = None,
    max_halvings: int = 20,
    keep_trajectory: bool = True,
) -> EquilibriumResult:
    """Integra em trechos de ``horizon`` RTTs e avalia o estado final de cada um.

    Convergiu quando a norma do lado direito no estado final é menor que
    ``residual_tol`` e os últimos 10% do trecho variam menos que
    ``residual_tol`` em cada componente. Sem convergência, a integração
    continua do estado final até ``max_horizon`` RTTs no total (o padrão é
    um único trecho): perto de Q pequeno o modelo cresce como Q² e a
    aproximação do ponto fixo pode levar centenas de RTTs. Não convergir
    não é exceção.
    """
    if any(v <= 0 for v in (state0.C, state0.Q, *state0.W)):
        raise DomainError("find_equilibrium exige estado inicial estritamente positivo")
    if max_horizon is not None and max_horizon < horizon:
        raise DomainError(f"max_horizon ({max_horizon}) menor que horizon ({horizon})")
    model = FluidModel(model)
    config = IntegratorConfig(
        dt=dt, t_end=horizon, method=method,
        tolerance=tolerance, max_halvings=max_halvings,
    )
    limite = horizon if max_horizon is None else max_horizon

    partes: list[Trajectory] = []
    estado = state0
    decorrido = 0.0
    while True:
        trajetoria = run_fluid(params, estado, config, model)
        decorrido += horizon
        if keep_trajectory:
            partes.append(trajetoria)

        final = trajetoria.final_state
        residual = _residuo(params, model, final)
        inicio_cauda = int(math.floor(0.9 * (len(trajetoria) - 1)))
        cauda = trajetoria.states[inicio_cauda:]
        variation = float(np.max(cauda.max(axis=0) - cauda.min(axis=0)))
        converged = residual < residual_tol and variation < residual_tol

        if converged or decorrido + horizon > limite * (1.0 + 1e-12):
            break
        logger.debug(
            "Sem convergência após %s RTT (resíduo=%.3e); estendendo por mais %s",
            decorrido, residual, horizon,
        )
        estado = FluidState.from_vector(final)

    if not converged:
        logger.warning(
            "Equilíbrio não atingido em %s RTT (resíduo=%.3e, variação=%.3e)",
            decorrido, residual, variation,
        )

    return EquilibriumResult(
        state=FluidState.from_vector(final),
        converged=converged,
        residual=residual,
        variation=variation,
        elapsed=decorrido,
        trajectory=_juntar(partes) if keep_trajectory else None,
    )


def random_positive_state(params: FluidParams, rng: np.random.Generator) -> FluidState:
    '''Estado com cada componente uniforme em (piso, B], piso = min(1, B/50) pacote.'''
    piso = min(1.0, params.B / 50.0)
    x = piso + (params.B - piso) * (1.0 - rng.random(params.k + 2))
    return FluidState.from_vector(x)


def convergence_sweep(
    params: FluidParams,
    n_starts: int,
    seed: int,
    horizon: float,
    dt: float,
    residual_tol: float,
    model: FluidModel | str = FluidModel.ETTBICC,
    max_horizon: float | None = None,
) -> SweepResult:
    '''Busca o equilíbrio a partir de ``n_starts`` estados positivos sorteados.'''
    if n_starts < 1:
        raise DomainError("n_starts deve ser >= 1")
    rng = np.random.default_rng(seed)
    resultados = [
        find_equilibrium(
            params, random_positive_state(params, rng), horizon, residual_tol,
            model=model, dt=dt, max_horizon=max_horizon, keep_trajectory=False,
        )
        for _ in range(n_starts)
    ]
    finais = np.array([r.state.as_vector() for r in resultados])
    spread = finais.max(axis=0) - finais.min(axis=0)

    logger.info(
        "Varredura com %d partidas: dispersão máxima %.3e, convergidas %d, maior horizonte %s RTT",
        n_starts, float(spread.max()), sum(r.converged for r in resultados),
        max(r.elapsed for r in resultados),
    )
    return SweepResult(results=resultados, fixed_point=finais.mean(axis=0), spread=spread)

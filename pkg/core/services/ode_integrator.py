"""Integrador Runge-Kutta explícito de quarta ordem.

Dois modos:
- ``rk4-fixed``: passo fixo ``dt``.
- ``rk4-halving``: cada passo é bisseccionado até que o passo cheio e a
  composição de dois meios passos concordem dentro de ``tolerance``
  (diferença absoluta por componente), limitado a ``max_halvings``.

Funções puras: nenhum estado compartilhado, entradas nunca são alteradas.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from core.exceptions import DomainError, IntegrationError

logger = logging.getLogger(__name__)

Rhs = Callable[[list[float], float], Sequence[float]]
Refine = Callable[[list[float], float], bool]


class IntegrationMethod(str, Enum):
    RK4_FIXED = "rk4-fixed"
    RK4_HALVING = "rk4-halving"


@dataclass(frozen=True, slots=True)
class IntegratorConfig:
    '''Parâmetros de uma corrida de integração (tempo em RTTs).'''

    dt: float
    t_end: float
    method: IntegrationMethod = IntegrationMethod.RK4_FIXED
    tolerance: float = 1e-8
    max_halvings: int = 20

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", IntegrationMethod(self.method))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError(f"dt deve ser positivo e finito: {self.dt!r}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise DomainError(f"t_end deve ser positivo e finito: {self.t_end!r}")
        if self.dt > self.t_end:
            raise DomainError(f"dt ({self.dt}) maior que t_end ({self.t_end})")
        if self.method is IntegrationMethod.RK4_HALVING and not self.tolerance > 0:
            raise DomainError("tolerance deve ser positiva no modo rk4-halving")
        if self.max_halvings < 0:
            raise DomainError("max_halvings não pode ser negativo")


@dataclass(frozen=True)
class Trajectory:
    '''Amostras ordenadas ``(t, estado)`` de uma integração.'''

    times: np.ndarray
    states: np.ndarray
    names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.names:
            nomes = tuple(f"x{i}" for i in range(self.states.shape[1]))
            object.__setattr__(self, "names", nomes)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def column(self, name: str) -> np.ndarray:
        try:
            return self.states[:, self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None


def _checar_finito(valores: Sequence[float], t: float, origem: str) -> None:
    if math.isfinite(sum(valores)):
        return
    indice = next((i for i, v in enumerate(valores) if not math.isfinite(v)), None)
    if indice is not None:
        raise IntegrationError(
            t, indice, f"{origem} não finita na componente {indice} em t={t!r}"
        )


def _derivada(rhs: Rhs, x: list[float], t: float, t_passo: float) -> list[float]:
    k = list(rhs(x, t))
    _checar_finito(k, t_passo, "Derivada")
    return k


def _rk4(rhs: Rhs, x: list[float], t: float, dt: float) -> list[float]:
    meio = 0.5 * dt
    k1 = _derivada(rhs, x, t, t)
    k2 = _derivada(rhs, [xi + meio * ki for xi, ki in zip(x, k1)], t + meio, t)
    k3 = _derivada(rhs, [xi + meio * ki for xi, ki in zip(x, k2)], t + meio, t)
    k4 = _derivada(rhs, [xi + dt * ki for xi, ki in zip(x, k3)], t + dt, t)
    sexto = dt / 6.0
    return [
        xi + sexto * (a + 2.0 * b + 2.0 * c + d)
        for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
    ]


def rk4_step(rhs: Rhs, state: Sequence[float] | np.ndarray, t: float, dt: float) -> np.ndarray:
    '''Um passo clássico de RK4. ``state`` não é modificado.'''
    if not dt > 0:
        raise DomainError(f"dt deve ser positivo: {dt!r}")
    x = np.asarray(state, dtype=float).tolist()
    return np.array(_rk4(rhs, x, t, dt))


def _passo_com_bisseccao(
    rhs: Rhs,
    x: list[float],
    t: float,
    h: float,
    tolerance: float,
    profundidade: int,
    max_halvings: int,
) -> list[float]:
    cheio = _rk4(rhs, x, t, h)
    meio = _rk4(rhs, x, t, 0.5 * h)
    composto = _rk4(rhs, meio, t + 0.5 * h, 0.5 * h)

    diferenca = max(abs(a - b) for a, b in zip(cheio, composto))
    if profundidade >= max_halvings or diferenca <= tolerance:
        return composto

    x_meio = _passo_com_bisseccao(
        rhs, x, t, 0.5 * h, tolerance, profundidade + 1, max_halvings
    )
    return _passo_com_bisseccao(
        rhs, x_meio, t + 0.5 * h, 0.5 * h, tolerance, profundidade + 1, max_halvings
    )


def integrate(
    rhs: Rhs,
    state0: Sequence[float] | np.ndarray,
    config: IntegratorConfig,
    names: Sequence[str] = (),
    refine: Refine | None = None,
) -> Trajectory:
    """Integra de t=0 até ``config.t_end``.

    Amostras em 0, dt, 2dt, ... e sempre uma última em ``t_end``.
    Os tempos são calculados como ``i * dt`` (sem acumulação), o que
    mantém a saída idêntica bit a bit entre execuções.

    O laço trabalha com listas de floats: para os vetores curtos do modelo
    fluido (k + 2 componentes) isso custa bem menos que operações numpy.
    ``refine``, quando informado, é consultado a cada passo do modo fixo;
    se devolver True, aquele passo usa a bissecção.
    """
    inicial = np.array(state0, dtype=float)
    if inicial.ndim != 1:
        raise DomainError("O estado inicial deve ser um vetor")
    x = inicial.tolist()
    _checar_finito(x, 0.0, "Estado inicial")
    if names and len(names) != len(x):
        raise DomainError(f"{len(names)} nomes para {len(x)} componentes")

    n_passos = int(math.floor(config.t_end / config.dt + 1e-9))
    tempos = [i * config.dt for i in range(n_passos + 1)]
    if config.t_end - tempos[-1] > 1e-12 * config.t_end:
        tempos.append(config.t_end)

    bisseccao = config.method is IntegrationMethod.RK4_HALVING
    estados = [x]

    for i in range(1, len(tempos)):
        t = tempos[i - 1]
        h = tempos[i] - t
        if bisseccao or (refine is not None and refine(x, t)):
            x = _passo_com_bisseccao(
                rhs, x, t, h, config.tolerance, 0, config.max_halvings
            )
        else:
            x = _rk4(rhs, x, t, h)
        _checar_finito(x, tempos[i], "Estado")
        estados.append(x)

    logger.debug("Integração concluída: %d amostras até t=%s", len(tempos), config.t_end)
    return Trajectory(
        times=np.array(tempos),
        states=np.array(estados, dtype=float).reshape(len(tempos), len(x)),
        names=tuple(names),
    )

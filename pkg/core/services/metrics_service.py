"""Métricas de avaliação de traços e trajetórias.

Justiça (Jain), utilização do gargalo, tempo de convergência, índice de
oscilação (taxa de variação total) e comportamento da fila. Funções puras
sobre séries imutáveis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from core.exceptions import DomainError
from core.services.ode_integrator import Trajectory
from core.services.packet_sim import Trace

logger = logging.getLogger(__name__)

Window = tuple[float, float]


@dataclass(frozen=True)
class MetricsReport:
    jain: float
    utilization: float
    convergence_time: float | None
    oscillation_index: float
    queue_max: float
    queue_mean_steady: float
    drops: int

    def as_dict(self) -> dict[str, float | int | None]:
        return asdict(self)


@dataclass(frozen=True)
class Comparison:
    labels: tuple[str, str]
    reports: tuple[MetricsReport, MetricsReport]
    deltas: dict[str, float | None]
    verdict: str


def jain_index(x: Sequence[float] | np.ndarray) -> float:
    '''(Σx)² / (k·Σx²).'''
    valores = np.asarray(x, dtype=float)
    if valores.ndim != 1 or valores.size == 0:
        raise DomainError("jain_index exige um vetor com ao menos um elemento")
    if not np.isfinite(valores).all() or (valores < 0).any():
        raise DomainError(f"Taxas devem ser finitas e não negativas: {valores.tolist()}")
    soma = valores.sum()
    if soma == 0:
        raise DomainError("jain_index indefinido para o vetor nulo")
    return float(soma * soma / (valores.size * np.dot(valores, valores)))


def steady_window(times: Sequence[float] | np.ndarray, fraction: float = 0.25) -> Window:
    '''Janela ``(t1 - fraction·span, t1]`` ao fim da série.'''
    if not 0 < fraction <= 1:
        raise DomainError(f"Fração de regime deve estar em (0, 1]: {fraction!r}")
    tempos = np.asarray(times, dtype=float)
    if tempos.size == 0:
        raise DomainError("Série vazia")
    inicio, fim = float(tempos[0]), float(tempos[-1])
    return fim - fraction * (fim - inicio), fim


def utilization(trace: Trace, B: float, window: Window | None = None) -> float:
    """Média de pacotes entregues por RTT dividida por B, limitada a [0, 1].

    A linha amostrada em t conta as entregas do intervalo (t-1, t], então a
    janela seleciona amostras com ``t0 < t <= t1``.
    """
    if not B > 0:
        raise DomainError(f"B deve ser positivo: {B!r}")
    tempos = np.asarray(trace.t, dtype=float)
    entregues = np.asarray(trace.delivered, dtype=float)
    t0, t1 = window if window is not None else steady_window(tempos)
    mascara = (tempos > t0) & (tempos <= t1)
    if not mascara.any():
        raise DomainError(f"Janela ({t0}, {t1}] sem amostras")
    return float(np.clip(entregues[mascara].mean() / B, 0.0, 1.0))


def convergence_time(
    times: Sequence[float] | np.ndarray,
    values: Sequence[float] | np.ndarray,
    target: float,
    band: float,
) -> float | None:
    """Primeiro t a partir do qual a série fica em target·(1 ± band) até o fim; None se nunca.

    O instante de entrada na faixa é interpolado linearmente entre a última
    amostra fora e a seguinte, de modo que o resultado não depende do passo
    de amostragem.
    """
    tempos = np.asarray(times, dtype=float)
    serie = np.asarray(values, dtype=float)
    if serie.size == 0 or serie.size != tempos.size:
        raise DomainError("Série vazia ou com tamanhos divergentes")
    if not target > 0:
        raise DomainError(f"target deve ser positivo: {target!r}")
    if not 0 < band < 1:
        raise DomainError(f"band deve estar em (0, 1): {band!r}")

    dentro = np.abs(serie - target) <= band * target
    if not dentro[-1]:
        return None
    fora = np.flatnonzero(~dentro)
    if fora.size == 0:
        return float(tempos[0])
    i = int(fora[-1])
    limite = target * (1.0 + band) if serie[i] > target else target * (1.0 - band)
    fracao = (serie[i] - limite) / (serie[i] - serie[i + 1])
    return float(tempos[i] + fracao * (tempos[i + 1] - tempos[i]))


def oscillation_index(
    times: Sequence[float] | np.ndarray,
    values: Sequence[float] | np.ndarray,
    window: Window | None = None,
) -> float:
    '''Soma de |diferenças sucessivas| dividida pela duração da janela em RTTs.'''
    tempos = np.asarray(times, dtype=float)
    serie = np.asarray(values, dtype=float)
    if serie.size != tempos.size:
        raise DomainError("Tempos e valores com tamanhos divergentes")
    if window is not None:
        mascara = (tempos >= window[0]) & (tempos <= window[1])
        tempos, serie = tempos[mascara], serie[mascara]
    if serie.size < 2:
        raise DomainError("oscillation_index exige ao menos duas amostras na janela")
    duracao = tempos[-1] - tempos[0]
    if not duracao > 0:
        raise DomainError("Janela com duração nula")
    return float(np.abs(np.diff(serie)).sum() / duracao)


def _resumo(
    tempos: np.ndarray,
    soma_w: np.ndarray,
    janelas_finais: np.ndarray,
    fila: np.ndarray,
    alvo: float,
    util: float,
    drops: int,
    steady_fraction: float,
    band: float,
) -> MetricsReport:
    t0, _ = steady_window(tempos, steady_fraction)
    fila_regime = fila[tempos >= t0]
    oscilacao = oscillation_index(tempos, soma_w) if tempos.size >= 2 else 0.0
    convergencia = convergence_time(tempos, soma_w, alvo, band) if alvo > 0 else None
    return MetricsReport(
        jain=jain_index(janelas_finais),
        utilization=util,
        convergence_time=convergencia,
        oscillation_index=oscilacao,
        queue_max=float(fila.max()),
        queue_mean_steady=float(fila_regime.mean()),
        drops=int(drops),
    )


def report_from_trace(
    trace: Trace,
    B: float,
    steady_fraction: float = 0.25,
    band: float = 0.05,
) -> MetricsReport:
    '''Relatório de um traço de pacotes; alvo de convergência = média de ΣW no regime.'''
    if len(trace) == 0:
        raise DomainError("Traço vazio")
    tempos = np.asarray(trace.t, dtype=float)
    janelas = trace.window_matrix()
    soma_w = janelas.sum(axis=1)
    t0, t1 = steady_window(tempos, steady_fraction)
    alvo = float(soma_w[tempos >= t0].mean())

    relatorio = _resumo(
        tempos, soma_w, janelas[-1], np.asarray(trace.queue, dtype=float), alvo,
        utilization(trace, B, (t0, t1)) if tempos.size >= 2 else 0.0,
        trace.drops[-1], steady_fraction, band,
    )
    logger.info("Relatório do traço: %s", relatorio.as_dict())
    return relatorio


def report_from_trajectory(
    trajectory: Trajectory,
    B: float,
    steady_fraction: float = 0.25,
    band: float = 0.05,
) -> MetricsReport:
    """Relatório de uma trajetória fluida ``(C, Q, W1..Wk)``.

    Utilização = média de ΣW no regime dividida por B; fila = Q virtual;
    alvo de convergência = ΣW final. Não há descartes no modelo fluido.
    """
    if not B > 0:
        raise DomainError(f"B deve ser positivo: {B!r}")
    tempos = trajectory.times
    janelas = trajectory.states[:, 2:]
    soma_w = janelas.sum(axis=1)
    t0, _ = steady_window(tempos, steady_fraction)
    util = float(np.clip(soma_w[tempos >= t0].mean() / B, 0.0, 1.0))

    relatorio = _resumo(
        tempos, soma_w, janelas[-1], trajectory.column("Q"), float(soma_w[-1]),
        util, 0, steady_fraction, band,
    )
    logger.info("Relatório da trajetória: %s", relatorio.as_dict())
    return relatorio


def _vencedor(nome: str, a: float | None, b: float | None, labels: tuple[str, str]) -> str:
    if a is None and b is None:
        return f"{nome}: tie"
    if a is None:
        return f"{nome}: {labels[1]}"
    if b is None or a < b:
        return f"{nome}: {labels[0]}"
    if b < a:
        return f"{nome}: {labels[1]}"
    return f"{nome}: tie"


def compare_reports(
    report_a: MetricsReport,
    report_b: MetricsReport,
    labels: tuple[str, str] = ("A", "B"),
) -> Comparison:
    """Diferenças (B − A) campo a campo e o veredito.

    O veredito é ``tie`` quando todas as diferenças são nulas; senão diz
    quem tem o menor ``oscillation_index`` e o menor ``convergence_time``.
    """
    dados_a, dados_b = report_a.as_dict(), report_b.as_dict()
    deltas: dict[str, float | None] = {}
    for campo, valor_a in dados_a.items():
        valor_b = dados_b[campo]
        if valor_a is None or valor_b is None:
            deltas[campo] = None if valor_a != valor_b else 0.0
        else:
            deltas[campo] = float(valor_b - valor_a)

    if all(d == 0.0 for d in deltas.values()):
        veredito = "tie"
    else:
        veredito = "; ".join((
            _vencedor("oscillation_index", report_a.oscillation_index,
                      report_b.oscillation_index, labels),
            _vencedor("convergence_time", report_a.convergence_time,
                      report_b.convergence_time, labels),
        ))
    if any(d is not None and not math.isfinite(d) for d in deltas.values()):
        logger.warning("Diferenças não finitas na comparação: %s", deltas)
    return Comparison(labels=labels, reports=(report_a, report_b), deltas=deltas, verdict=veredito)

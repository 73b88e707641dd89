"""Simulador de eventos discretos da topologia haltere.

k fontes, um roteador gargalo com fila FIFO finita (descarte na cauda) e k
destinos. O relógio é racional (``Fraction``) e medido em RTTs, de modo
que empates e janelas de contagem são exatos e a execução é reprodutível
bit a bit.

Atrasos de propagação (ida e volta = 1 RTT): fonte -> roteador 1/4,
roteador -> destino 1/4, destino -> fonte 1/2. Acesso com ``access_bw``
pacotes/RTT; gargalo com ``B`` pacotes/RTT.

A cada época (múltiplo de 1 RTT) cada emissor aplica no máximo uma
atualização de janela com o último ACK recebido e emite n pacotes
espaçados uniformemente ao longo do RTT, com n tirado de min(W, taxa
concedida) mais o crédito fracionário da rodada anterior. O roteador fecha
C e Q 1/4 + tx/2 RTT depois de cada época, de modo que cada fechamento
cobre exatamente as chegadas de uma rodada de emissão.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction

import numpy as np

from core.exceptions import ConfigError, SimulationError
from core.services.fluid_congestion import FluidParams, default_params
from core.services.protocol import (
    CongestionHeader,
    RouterParams,
    RouterState,
    SenderState,
    receiver_on_packet,
    router_epoch,
    router_on_arrival,
    router_on_departure,
    sender_emit,
    sender_on_ack,
)

logger = logging.getLogger(__name__)

ATRASO_FONTE_ROTEADOR = Fraction(1, 4)
ATRASO_ROTEADOR_DESTINO = Fraction(1, 4)
ATRASO_DESTINO_FONTE = Fraction(1, 2)


class EventKind(IntEnum):
    '''Tipos de evento; o valor é a prioridade de desempate (menor primeiro).'''

    PACKET_DEPARTURE = 0
    PACKET_ARRIVAL = 1
    PACKET_SEND = 2
    ACK_ARRIVAL = 3
    ROUTER_EPOCH = 4
    EPOCH_TICK = 5
    SAMPLE_TICK = 6


@dataclass(frozen=True, slots=True)
class SimEvent:
    t: Fraction
    kind: EventKind
    flow_id: int
    seq: int
    payload: CongestionHeader | None = None

    @property
    def sort_key(self) -> tuple[Fraction, int, int, int]:
        return (self.t, int(self.kind), self.flow_id, self.seq)


@dataclass(frozen=True)
class ScenarioConfig:
    k: int
    B: float
    access_bw: float
    rtt: float
    queue_capacity: int
    duration: float
    initial_W: tuple[float, ...]
    initial_C: float
    initial_Q: float
    seed: int = 0
    params: FluidParams | None = None

    def errors(self) -> dict[str, str]:
        erros: dict[str, str] = {}
        if not isinstance(self.k, int) or self.k < 1:
            erros["k"] = "deve ser inteiro >= 1"
        if not (math.isfinite(self.B) and self.B > 0):
            erros["B"] = "deve ser positivo"
        if not (math.isfinite(self.access_bw) and self.access_bw > 0):
            erros["access_bw"] = "deve ser positivo"
        elif "B" not in erros and self.access_bw < self.B:
            erros["access_bw"] = f"deve ser >= B ({self.B}) para o gargalo ser único"
        if not (math.isfinite(self.rtt) and self.rtt > 0):
            erros["rtt"] = "deve ser positivo"
        if not isinstance(self.queue_capacity, int) or self.queue_capacity <= 0:
            erros["queue_capacity"] = "deve ser inteiro > 0"
        if not (math.isfinite(self.duration) and self.duration > 0):
            erros["duration"] = "deve ser positiva"
        if "k" not in erros and len(self.initial_W) != self.k:
            erros["initial_W"] = f"esperados {self.k} valores, recebidos {len(self.initial_W)}"
        elif any(not (math.isfinite(w) and w > 0) for w in self.initial_W):
            erros["initial_W"] = "todas as janelas iniciais devem ser positivas"
        if not (math.isfinite(self.initial_C) and self.initial_C >= 0):
            erros["initial_C"] = "deve ser >= 0"
        if not (math.isfinite(self.initial_Q) and self.initial_Q >= 0):
            erros["initial_Q"] = "deve ser >= 0"
        if self.params is not None and "k" not in erros and self.params.k != self.k:
            erros["params"] = f"parâmetros para k={self.params.k}, cenário com k={self.k}"
        return erros

    def fluid_params(self) -> FluidParams:
        return self.params if self.params is not None else default_params(self.B, self.k)


@dataclass
class Trace:
    '''Série amostrada uma vez por RTT.

    ``queue`` é a ocupação da FIFO no instante da amostra e ``queue_peak`` o
    pico no intervalo que termina nela; ``delivered`` conta as saídas do
    gargalo nesse intervalo.
    '''

    k: int
    t: list[float] = field(default_factory=list)
    windows: list[tuple[float, ...]] = field(default_factory=list)
    router_C: list[float] = field(default_factory=list)
    router_Q: list[float] = field(default_factory=list)
    queue: list[int] = field(default_factory=list)
    queue_peak: list[int] = field(default_factory=list)
    delivered: list[int] = field(default_factory=list)
    drops: list[int] = field(default_factory=list)
    sent: list[int] = field(default_factory=list)
    in_flight: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def header(self) -> list[str]:
        return ["t", *(f"W{i}" for i in range(1, self.k + 1)),
                "C", "Q", "queue", "delivered", "drops"]

    def rows(self) -> list[tuple]:
        return [
            (t, *w, c, q, fila, entregues, descartes)
            for t, w, c, q, fila, entregues, descartes in zip(
                self.t, self.windows, self.router_C, self.router_Q,
                self.queue, self.delivered, self.drops,
            )
        ]

    def window_matrix(self) -> np.ndarray:
        return np.array(self.windows, dtype=float).reshape(len(self.t), self.k)


def _racional(valor: float) -> Fraction:
    return Fraction(str(valor))


class Simulation:
    '''Uma instância de simulação: um laço de eventos, um relógio.'''

    def __init__(self, cfg: ScenarioConfig) -> None:
        self.cfg = cfg
        self.params = cfg.fluid_params()
        self.router = RouterState(
            C=float(cfg.initial_C),
            Q=float(cfg.initial_Q),
            B=float(cfg.B),
            params=RouterParams.from_fluid(self.params),
        )
        self.senders = [
            SenderState(
                W=float(w),
                a=self.params.a[i],
                epsilon=self.params.epsilon,
                b=self.params.b,
                credit=i / cfg.k,
            )
            for i, w in enumerate(cfg.initial_W)
        ]
        self.trace = Trace(k=cfg.k)

        self._servico = 1 / _racional(cfg.B)
        self._tx_acesso = 1 / _racional(cfg.access_bw)
        self._ultimo_ack: list[CongestionHeader | None] = [None] * cfg.k
        self._fila: deque[tuple[int, CongestionHeader]] = deque()
        self._eventos: list[tuple[tuple, SimEvent]] = []
        self._seq = 0
        self._relogio = Fraction(0)
        self._enlace_ocupado = False

        self.sent = 0
        self.delivered = 0
        self.drops = 0
        self.in_flight = 0
        self._entregues_intervalo = 0
        self._pico_fila = 0

    # ------------------------------------------------------------------ #
    # Fila de eventos
    # ------------------------------------------------------------------ #
    @property
    def clock(self) -> Fraction:
        return self._relogio

    @property
    def queue_len(self) -> int:
        return len(self._fila)

    def schedule(
        self,
        t: Fraction,
        kind: EventKind,
        flow_id: int = -1,
        payload: CongestionHeader | None = None,
    ) -> None:
        evento = SimEvent(t=t, kind=kind, flow_id=flow_id, seq=self._seq, payload=payload)
        self._seq += 1
        heapq.heappush(self._eventos, (evento.sort_key, evento))

    # ------------------------------------------------------------------ #
    # Tratadores
    # ------------------------------------------------------------------ #
    def _emitir_janelas(self, t: Fraction) -> None:
        for i, emissor in enumerate(self.senders):
            self.senders[i], n = sender_emit(emissor)
            if n <= 0:
                continue
            espacamento = max(Fraction(1, n), self._tx_acesso)
            fase = Fraction(i, self.cfg.k) * espacamento
            cabecalho = CongestionHeader(
                hdr_bw=0.0, hdr_c=0.0, hdr_q=0.0, hdr_w=emissor.W, hdr_rate=float(n)
            )
            for j in range(n):
                self.schedule(t + fase + j * espacamento, EventKind.PACKET_SEND, i, cabecalho)

    def _envio(self, ev: SimEvent) -> None:
        self.sent += 1
        self.in_flight += 1
        chegada = ev.t + self._tx_acesso + ATRASO_FONTE_ROTEADOR
        self.schedule(chegada, EventKind.PACKET_ARRIVAL, ev.flow_id, ev.payload)

    def _chegada(self, ev: SimEvent) -> None:
        self.router = router_on_arrival(self.router, ev.payload)
        if not self._enlace_ocupado:
            self._enlace_ocupado = True
            self.schedule(ev.t + self._servico, EventKind.PACKET_DEPARTURE, ev.flow_id, ev.payload)
        elif len(self._fila) >= self.cfg.queue_capacity:
            self.drops += 1
            self.in_flight -= 1
            logger.debug("Descarte do fluxo %d em t=%s", ev.flow_id, float(ev.t))
        else:
            self._fila.append((ev.flow_id, ev.payload))
            self._pico_fila = max(self._pico_fila, len(self._fila))

    def _partida(self, ev: SimEvent) -> None:
        carimbado = router_on_departure(self.router, ev.payload)
        self.delivered += 1
        self.in_flight -= 1
        self._entregues_intervalo += 1

        ack = receiver_on_packet(carimbado)
        retorno = ATRASO_ROTEADOR_DESTINO + ATRASO_DESTINO_FONTE
        self.schedule(ev.t + retorno, EventKind.ACK_ARRIVAL, ev.flow_id, ack)

        if self._fila:
            fluxo, cabecalho = self._fila.popleft()
            self.schedule(ev.t + self._servico, EventKind.PACKET_DEPARTURE, fluxo, cabecalho)
        else:
            self._enlace_ocupado = False

    def _ack(self, ev: SimEvent) -> None:
        self._ultimo_ack[ev.flow_id] = ev.payload

    def _epoca_roteador(self, ev: SimEvent) -> None:
        self.router = router_epoch(self.router)
        self.schedule(ev.t + 1, EventKind.ROUTER_EPOCH)

    def _epoca(self, ev: SimEvent) -> None:
        for i, cabecalho in enumerate(self._ultimo_ack):
            if cabecalho is not None:
                self.senders[i] = sender_on_ack(self.senders[i], cabecalho, dt=1.0)
        self._emitir_janelas(ev.t)
        self.schedule(ev.t + 1, EventKind.EPOCH_TICK)

    def _amostra(self, ev: SimEvent) -> None:
        tr = self.trace
        tr.t.append(float(ev.t))
        tr.windows.append(tuple(s.W for s in self.senders))
        tr.router_C.append(self.router.C)
        tr.router_Q.append(self.router.Q)
        tr.queue.append(len(self._fila))
        tr.queue_peak.append(max(self._pico_fila, len(self._fila)))
        tr.delivered.append(self._entregues_intervalo)
        tr.drops.append(self.drops)
        tr.sent.append(self.sent)
        tr.in_flight.append(self.in_flight)

        self._entregues_intervalo = 0
        self._pico_fila = len(self._fila)
        self.schedule(ev.t + 1, EventKind.SAMPLE_TICK)

    # ------------------------------------------------------------------ #
    # Laço principal
    # ------------------------------------------------------------------ #
    def run(self, duration: float) -> Trace:
        fim = _racional(duration)
        if not fim > 0:
            raise ConfigError({"duration": "deve ser positiva"})

        tratadores = {
            EventKind.PACKET_DEPARTURE: self._partida,
            EventKind.PACKET_ARRIVAL: self._chegada,
            EventKind.PACKET_SEND: self._envio,
            EventKind.ACK_ARRIVAL: self._ack,
            EventKind.ROUTER_EPOCH: self._epoca_roteador,
            EventKind.EPOCH_TICK: self._epoca,
            EventKind.SAMPLE_TICK: self._amostra,
        }

        while self._eventos and self._eventos[0][0][0] <= fim:
            _, ev = heapq.heappop(self._eventos)
            if ev.t < self._relogio:
                raise SimulationError(
                    f"Evento fora de ordem: {ev.kind.name} em t={float(ev.t)} "
                    f"com relógio em {float(self._relogio)}"
                )
            self._relogio = ev.t
            tratadores[ev.kind](ev)

        logger.info(
            "Simulação até t=%s RTT: enviados=%d entregues=%d descartes=%d",
            float(fim), self.sent, self.delivered, self.drops,
        )
        return self.trace


def build_dumbbell(cfg: ScenarioConfig) -> Simulation:
    """Monta a topologia e agenda a amostra em t=0, a primeira rodada e as épocas.

    A época dos emissores cai em t=1; a do roteador em 1 + 1/4 + tx/2, logo
    depois que a última chegada da rodada 0 pode ter ocorrido.
    """
    erros = cfg.errors()
    if erros:
        raise ConfigError(erros)

    sim = Simulation(cfg)
    sim.schedule(Fraction(0), EventKind.SAMPLE_TICK)
    sim._emitir_janelas(Fraction(0))
    sim.schedule(Fraction(1), EventKind.EPOCH_TICK)
    sim.schedule(1 + ATRASO_FONTE_ROTEADOR + sim._tx_acesso / 2, EventKind.ROUTER_EPOCH)
    logger.info(
        "Haltere montado: k=%d, B=%s, acesso=%s, fila=%d, B_eff=%s",
        cfg.k, cfg.B, cfg.access_bw, cfg.queue_capacity, sim.params.B_eff,
    )
    return sim


def run(sim: Simulation, duration: float) -> Trace:
    return sim.run(duration)

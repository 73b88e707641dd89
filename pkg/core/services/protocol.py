"""Máquinas de estado do protocolo: roteador (AQM), emissor e receptor.

Independentes de qualquer transporte: o simulador de pacotes as conduz.
Cada função devolve um novo estado; nenhuma altera a entrada.

O roteador não guarda estado por fluxo. Cada pacote carrega a janela do
emissor (``hdr_w``) e quantos pacotes o fluxo emitiu na rodada
(``hdr_rate``). Com peso Wj/nj por pacote, os nj pacotes do fluxo j somam
Wj na carga virtual ``acc_load``, Wj/(C+Wj) em ``acc_ratio`` e 1 em
``acc_flows``. Na volta o roteador reescreve ``hdr_rate`` com a taxa
concedida por fluxo, B_eff dividido pelo número de fluxos estimado.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

from core.exceptions import DomainError, ProtocolError
from core.services.fluid_congestion import FluidParams
from core.services.fracoes import razao

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class CongestionHeader:
    hdr_bw: float
    hdr_c: float
    hdr_q: float
    hdr_w: float
    hdr_rate: float = 0.0

    def validate(self) -> None:
        valores = (self.hdr_bw, self.hdr_c, self.hdr_q, self.hdr_w, self.hdr_rate)
        if not all(math.isfinite(v) for v in valores):
            raise ProtocolError(f"Cabeçalho não finito: {self}")
        if any(v < 0 for v in valores):
            raise ProtocolError(f"Cabeçalho com campo negativo: {self}")


@dataclass(frozen=True, slots=True)
class RouterParams:
    '''Subconjunto escalar de FluidParams usado pelo roteador (c_i = 1).'''

    alpha: float
    beta: float
    C_C: float
    eta: float
    B_eff: float

    @classmethod
    def from_fluid(cls, params: FluidParams) -> "RouterParams":
        if any(c != 1.0 for c in params.c):
            logger.warning("Roteador assume c_i = 1; valores %s ignorados", params.c)
        return cls(
            alpha=params.alpha,
            beta=params.beta,
            C_C=params.C_C,
            eta=params.eta,
            B_eff=params.B_eff,
        )


@dataclass(frozen=True, slots=True)
class RouterState:
    C: float
    Q: float
    B: float
    params: RouterParams
    epoch_len: float = 1.0
    acc_pkts: int = 0
    acc_load: float = 0.0
    acc_ratio: float = 0.0
    acc_flows: float = 0.0
    share: float = 0.0


@dataclass(frozen=True, slots=True)
class SenderState:
    W: float
    a: float
    epsilon: float
    b: float
    W_floor: float = 1.0
    last_seen: tuple[float, float, float] | None = None
    pending_dt: float = 0.0
    rejected: int = 0
    granted: float = 0.0
    credit: float = 0.0

    def __post_init__(self) -> None:
        if not self.W_floor > 0:
            raise DomainError("W_floor deve ser positivo")
        if self.W < self.W_floor:
            object.__setattr__(self, "W", self.W_floor)


def router_on_arrival(rs: RouterState, hdr: CongestionHeader) -> RouterState:
    """Contabiliza um pacote que chegou ao roteador, mesmo que venha a ser descartado.

    O peso Wj/nj faz os nj pacotes da rodada do fluxo j somarem Wj.
    """
    peso = razao(hdr.hdr_w, hdr.hdr_rate)
    return replace(
        rs,
        acc_pkts=rs.acc_pkts + 1,
        acc_load=rs.acc_load + peso,
        acc_ratio=rs.acc_ratio + razao(peso, rs.C + hdr.hdr_w),
        acc_flows=rs.acc_flows + razao(1.0, hdr.hdr_rate),
    )


def router_on_departure(rs: RouterState, hdr: CongestionHeader) -> CongestionHeader:
    '''Carimba B, C, Q e a taxa concedida (B antes da primeira época) no pacote que sai.'''
    taxa = rs.share if rs.share > 0 else rs.B
    return replace(hdr, hdr_bw=rs.B, hdr_c=rs.C, hdr_q=rs.Q, hdr_rate=taxa)


def router_on_packet(
    rs: RouterState, hdr: CongestionHeader
) -> tuple[RouterState, CongestionHeader]:
    '''Chegada e saída no mesmo instante: acumula o pacote e devolve o cabeçalho carimbado.'''
    novo = router_on_arrival(rs, hdr)
    return novo, router_on_departure(novo, hdr)


def router_epoch(rs: RouterState, dt: float | None = None) -> RouterState:
    """Fecha a época: um passo de Euler das equações de C e Q.

    ``acc_ratio`` substitui Σ Wj/(C+Wj) e a carga virtual ``acc_load``
    substitui ΣWi. C e Q são limitados a zero por baixo. A taxa concedida
    passa a ser B_eff / ``acc_flows``; numa época sem chegadas a anterior
    é mantida. Os acumuladores são zerados.
    """
    passo = rs.epoch_len if dt is None else dt
    p = rs.params
    C, Q = rs.C, rs.Q
    chegada = rs.acc_load

    dC = C * (p.alpha * (1.0 - C / p.C_C) - p.beta * rs.acc_ratio)
    M = min(p.B_eff, Q + chegada)
    dQ = Q * (razao(chegada, Q + chegada) - p.eta * razao(M, Q + M))

    novo_C = max(0.0, C + passo * dC)
    novo_Q = max(0.0, Q + passo * dQ)
    parcela = razao(p.B_eff, rs.acc_flows) if rs.acc_flows > 0 else rs.share
    logger.debug(
        "Época do roteador: pacotes=%d carga=%.4f fluxos=%.3f C=%.4f->%.4f Q=%.4f->%.4f",
        rs.acc_pkts, chegada, rs.acc_flows, C, novo_C, Q, novo_Q,
    )
    return replace(
        rs, C=novo_C, Q=novo_Q, share=parcela,
        acc_pkts=0, acc_load=0.0, acc_ratio=0.0, acc_flows=0.0,
    )


def receiver_on_packet(hdr: CongestionHeader) -> CongestionHeader:
    '''O ACK leva uma cópia campo a campo do cabeçalho de dados.'''
    return replace(hdr)


def sender_on_ack(ss: SenderState, hdr: CongestionHeader, dt: float) -> SenderState:
    """Atualiza a janela se (C, Q, B) mudou desde o último cabeçalho visto.

    Sem mudança, o tempo decorrido é acumulado em ``pending_dt`` e aplicado
    inteiro na próxima atualização. A taxa concedida do cabeçalho é guardada
    em qualquer caso. Cabeçalhos inválidos são descartados e contados em
    ``rejected``.
    """
    if not dt > 0:
        raise DomainError(f"dt deve ser positivo: {dt!r}")
    try:
        hdr.validate()
        if hdr.hdr_bw == 0:
            raise ProtocolError("Cabeçalho sem largura de banda")
    except ProtocolError as exc:
        logger.warning("Cabeçalho descartado pelo emissor: %s", exc)
        return replace(ss, rejected=ss.rejected + 1)

    concedida = hdr.hdr_rate if hdr.hdr_rate > 0 else ss.granted
    visto = (hdr.hdr_c, hdr.hdr_q, hdr.hdr_bw)
    if visto == ss.last_seen:
        return replace(ss, pending_dt=ss.pending_dt + dt, granted=concedida)

    passo = ss.pending_dt + dt
    C_W = hdr.hdr_bw / 2.0
    W = ss.W
    taxa = (
        ss.a * (1.0 - W / C_W)
        + ss.epsilon * razao(hdr.hdr_c, hdr.hdr_c + W)
        - ss.b * razao(hdr.hdr_q, hdr.hdr_q + W)
    )
    return replace(
        ss,
        W=max(ss.W_floor, W + passo * W * taxa),
        last_seen=visto,
        pending_dt=0.0,
        granted=concedida,
    )


def sender_emit(ss: SenderState) -> tuple[SenderState, int]:
    """Quantos pacotes emitir nesta rodada.

    A taxa é min(W, concedida), ou W enquanto nada foi concedido. A parte
    fracionária vira crédito para a rodada seguinte, de modo que a média
    emitida por RTT é a própria taxa.
    """
    taxa = min(ss.W, ss.granted) if ss.granted > 0 else ss.W
    total = ss.credit + taxa
    n = math.floor(total)
    return replace(ss, credit=total - n), n

"""Modelos clássicos de cadeia alimentar.

- Lotka-Volterra (presa r, predador f), com variante logística da presa.
- Cadeia de três níveis planta-herbívoro-carnívoro (p, r, f), nas versões
  dependente da presa e dependente da razão.

Servem como dinâmica de referência e como casos de teste do integrador.
Os parâmetros são validados na construção; as funções de lado direito não
repetem essa validação.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Sequence

from core.exceptions import DomainError
from core.services.fracoes import razao

Campo = Callable[[Sequence[float], float], tuple[float, ...]]


def _exigir_positivos(obj: object) -> None:
    for campo in fields(obj):
        valor = getattr(obj, campo.name)
        if valor is None:
            continue
        if not (math.isfinite(valor) and valor > 0):
            raise DomainError(f"{campo.name} deve ser estritamente positivo: {valor!r}")


def _exigir_populacoes(**populacoes: float) -> None:
    for nome, valor in populacoes.items():
        if not math.isfinite(valor) or valor < 0:
            raise DomainError(f"População {nome} inválida: {valor!r}")


@dataclass(frozen=True, slots=True)
class LotkaVolterraParams:
    a: float
    b: float
    c: float
    h: float
    C_r: float | None = None

    def __post_init__(self) -> None:
        _exigir_positivos(self)


@dataclass(frozen=True, slots=True)
class TriTrophicParams:
    '''Parâmetros da cadeia de três níveis.

    ``m1, m2, n1, n2`` (taxas máximas e constantes de meia saturação)
    só são usados pela variante dependente da razão.
    '''

    alpha: float
    beta: float
    C_p: float
    a: float
    C_r: float
    epsilon: float
    b: float
    c: float
    h: float
    m1: float = 1.0
    m2: float = 1.0
    n1: float = 1.0
    n2: float = 1.0

    def __post_init__(self) -> None:
        _exigir_positivos(self)


def lotka_volterra_rhs(params: LotkaVolterraParams, r: float, f: float) -> tuple[float, float]:
    _exigir_populacoes(r=r, f=f)
    if params.C_r is None:
        dr = params.a * r - params.b * r * f
    else:
        dr = params.a * (1.0 - r / params.C_r) * r - params.b * r * f
    df = params.c * r * f - params.h * f
    return dr, df


def lotka_volterra_first_integral(params: LotkaVolterraParams, r: float, f: float) -> float:
    '''H = c·r − h·ln r + b·f − a·ln f, constante ao longo das órbitas clássicas.'''
    if r <= 0 or f <= 0:
        raise DomainError("A integral primeira exige r > 0 e f > 0")
    return params.c * r - params.h * math.log(r) + params.b * f - params.a * math.log(f)


def prey_dependent_chain_rhs(
    params: TriTrophicParams, p: float, r: float, f: float
) -> tuple[float, float, float]:
    _exigir_populacoes(p=p, r=r, f=f)
    dp = p * (params.alpha * (1.0 - p / params.C_p) - params.beta * r)
    dr = r * (params.a * (1.0 - r / params.C_r) + params.epsilon * p - params.b * f)
    df = f * (params.c * r - params.h)
    return dp, dr, df


def ratio_dependent_chain_rhs(
    params: TriTrophicParams, p: float, r: float, f: float
) -> tuple[float, float, float]:
    # O denominador do termo de predação em dr é f + n2·r e o de df é
    # r + n2·f, exatamente como no modelo publicado.
    _exigir_populacoes(p=p, r=r, f=f)
    consumo_planta = razao(params.m1 * r, p + params.n1 * r)
    ganho_herbivoro = razao(params.m1 * p, p + params.n1 * r)
    perda_herbivoro = razao(params.m2 * f, f + params.n2 * r)
    ganho_carnivoro = razao(params.m2 * r, r + params.n2 * f)

    dp = p * (params.alpha * (1.0 - p / params.C_p) - params.beta * consumo_planta)
    dr = r * (
        params.a * (1.0 - r / params.C_r)
        + params.epsilon * ganho_herbivoro
        - params.b * perda_herbivoro
    )
    df = f * (ganho_carnivoro - params.h)
    return dp, dr, df


def lotka_volterra_field(params: LotkaVolterraParams) -> Campo:
    def campo(x: Sequence[float], t: float) -> tuple[float, ...]:
        return lotka_volterra_rhs(params, x[0], x[1])
    return campo


def prey_dependent_field(params: TriTrophicParams) -> Campo:
    def campo(x: Sequence[float], t: float) -> tuple[float, ...]:
        return prey_dependent_chain_rhs(params, x[0], x[1], x[2])
    return campo


def ratio_dependent_field(params: TriTrophicParams) -> Campo:
    def campo(x: Sequence[float], t: float) -> tuple[float, ...]:
        return ratio_dependent_chain_rhs(params, x[0], x[1], x[2])
    return campo

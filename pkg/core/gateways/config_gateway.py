"""Leitura de arquivos de cenário ``chave = valor``.

Formato: uma atribuição por linha, ``#`` inicia comentário, listas
separadas por vírgula. Cada chave é declarada em um esquema com seu
conversor; chaves desconhecidas e valores inválidos são erros que citam a
chave. Overrides ``--set chave=valor`` passam pelo mesmo esquema.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from core.exceptions import ConfigError

logger = logging.getLogger(__name__)

Parser = Callable[[str], Any]


def _real(texto: str) -> float:
    return float(texto)


def _inteiro(texto: str) -> int:
    valor = float(texto)
    if not valor.is_integer():
        raise ValueError(f"esperado inteiro, recebido {texto!r}")
    return int(valor)


def _lista_reais(texto: str) -> tuple[float, ...]:
    itens = [item.strip() for item in texto.split(",")]
    if not all(itens):
        raise ValueError("lista com item vazio")
    return tuple(float(item) for item in itens)


def _escolha(*opcoes: str) -> Parser:
    def converter(texto: str) -> str:
        valor = texto.strip().lower()
        if valor not in opcoes:
            raise ValueError(f"esperado um de {', '.join(opcoes)}")
        return valor
    return converter


@dataclass(frozen=True)
class ConfigSchema:
    nome: str
    campos: Mapping[str, Parser]
    obrigatorias: tuple[str, ...] = ()


_METODOS = _escolha("rk4-fixed", "rk4-halving")

SCENARIO_SCHEMA = ConfigSchema(
    nome="cenário",
    campos={
        "model": _escolha("ettbicc", "ttbicc"),
        "B": _real,
        "k": _inteiro,
        "alpha": _real,
        "beta": _real,
        "delta": _real,
        "a": _lista_reais,
        "epsilon": _real,
        "b": _real,
        "c": _lista_reais,
        "eta": _real,
        "C_C": _real,
        "C_W": _real,
        "B_eff": _real,
        "phi": _real,
        "theta": _real,
        "initial_C": _real,
        "initial_Q": _real,
        "initial_W": _lista_reais,
        "duration": _real,
        "dt": _real,
        "method": _METODOS,
        "tolerance": _real,
        "max_halvings": _inteiro,
        "residual_tol": _real,
        "sweep_starts": _inteiro,
        "sweep_horizon": _real,
        "sweep_max_horizon": _real,
        "seed": _inteiro,
        "access_bw": _real,
        "rtt": _real,
        "queue_capacity": _inteiro,
    },
    obrigatorias=("B", "k"),
)

FOODCHAIN_SCHEMA = ConfigSchema(
    nome="cadeia alimentar",
    campos={
        "model": _escolha("lotka_volterra", "logistic", "prey_dependent", "ratio_dependent"),
        "a": _real,
        "b": _real,
        "c": _real,
        "h": _real,
        "C_r": _real,
        "alpha": _real,
        "beta": _real,
        "C_p": _real,
        "epsilon": _real,
        "m1": _real,
        "m2": _real,
        "n1": _real,
        "n2": _real,
        "initial": _lista_reais,
        "t_end": _real,
        "dt": _real,
        "method": _METODOS,
        "tolerance": _real,
        "max_halvings": _inteiro,
    },
    obrigatorias=("model",),
)


def parse_overrides(pares: Iterable[str]) -> dict[str, str]:
    '''Converte ``["chave=valor", ...]`` em dicionário de textos.'''
    brutos: dict[str, str] = {}
    erros: dict[str, str] = {}
    for par in pares:
        chave, sep, valor = par.partition("=")
        chave = chave.strip()
        if not sep or not chave:
            erros[par] = "override deve ter a forma chave=valor"
            continue
        brutos[chave] = valor.strip()
    if erros:
        raise ConfigError(erros)
    return brutos


def _ler_linhas(caminho: Path) -> tuple[dict[str, str], dict[str, str]]:
    brutos: dict[str, str] = {}
    erros: dict[str, str] = {}
    for numero, linha in enumerate(caminho.read_text(encoding="utf-8").splitlines(), start=1):
        conteudo = linha.split("#", 1)[0].strip()
        if not conteudo:
            continue
        chave, sep, valor = conteudo.partition("=")
        chave = chave.strip()
        if not sep or not chave:
            erros[f"linha {numero}"] = f"esperado 'chave = valor': {linha.strip()!r}"
        elif chave in brutos:
            erros[chave] = f"chave repetida na linha {numero}"
        else:
            brutos[chave] = valor.strip()
    return brutos, erros


def load_config(
    path: str | Path | None,
    schema: ConfigSchema = SCENARIO_SCHEMA,
    overrides: Mapping[str, str] | None = None,
    required: Iterable[str] | None = None,
) -> dict[str, Any]:
    """Lê, aplica overrides e converte. Todos os erros vão em um só ConfigError.

    ``path`` pode ser None quando tudo vem de overrides.
    """
    brutos: dict[str, str] = {}
    erros: dict[str, str] = {}

    if path is not None:
        caminho = Path(path)
        if not caminho.is_file():
            raise ConfigError({"config": f"arquivo não encontrado: {caminho}"})
        brutos, erros = _ler_linhas(caminho)

    brutos.update(overrides or {})

    config: dict[str, Any] = {}
    for chave, texto in brutos.items():
        conversor = schema.campos.get(chave)
        if conversor is None:
            erros[chave] = f"chave desconhecida para {schema.nome}"
            continue
        try:
            config[chave] = conversor(texto)
        except ValueError as exc:
            erros[chave] = f"valor inválido {texto!r} ({exc})"

    obrigatorias = schema.obrigatorias if required is None else tuple(required)
    for chave in obrigatorias:
        if chave not in brutos and chave not in erros:
            erros[chave] = "chave obrigatória ausente"

    if erros:
        raise ConfigError(erros)

    logger.debug("Configuração de %s carregada de %s: %s", schema.nome, path, config)
    return config

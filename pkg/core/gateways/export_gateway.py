"""Escrita e leitura dos artefatos de uma execução.

CSV para trajetórias, traços e métricas; blocos ``chave = valor`` para o
eco de parâmetros e o relatório. Reais são escritos com ``repr`` para que
a releitura reproduza os valores bit a bit.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from core.exceptions import ConfigError
from core.services.metrics_service import Comparison, MetricsReport
from core.services.ode_integrator import Trajectory
from core.services.packet_sim import Trace

logger = logging.getLogger(__name__)


def _formatar(valor: Any) -> str:
    if valor is None:
        return "not-converged"
    if isinstance(valor, (float, np.floating)):
        return repr(float(valor))
    if isinstance(valor, (tuple, list)):
        return ", ".join(_formatar(v) for v in valor)
    return str(valor)


def _preparar(diretorio: str | Path) -> Path:
    destino = Path(diretorio)
    destino.mkdir(parents=True, exist_ok=True)
    return destino


def _escrever_csv(caminho: Path, cabecalho: Sequence[str], linhas: Iterable[Sequence[Any]]) -> Path:
    with caminho.open("w", newline="", encoding="utf-8") as arquivo:
        escritor = csv.writer(arquivo)
        escritor.writerow(cabecalho)
        for linha in linhas:
            escritor.writerow([_formatar(v) for v in linha])
    logger.info("Arquivo gravado: %s", caminho)
    return caminho


def write_trajectory_csv(trajectory: Trajectory, diretorio: str | Path,
                         nome: str = "trajetoria.csv") -> Path:
    '''Colunas ``t``, os nomes do estado e, se houver janelas, ``sumW``.'''
    janelas = [i for i, n in enumerate(trajectory.names) if n.startswith("W")]
    cabecalho = ["t", *trajectory.names] + (["sumW"] if janelas else [])
    linhas = []
    for t, estado in zip(trajectory.times, trajectory.states):
        extra = [float(estado[janelas].sum())] if janelas else []
        linhas.append([float(t), *(float(v) for v in estado), *extra])
    return _escrever_csv(_preparar(diretorio) / nome, cabecalho, linhas)


def write_trace_csv(trace: Trace, diretorio: str | Path, nome: str = "traco.csv") -> Path:
    return _escrever_csv(_preparar(diretorio) / nome, trace.header, trace.rows())


def write_key_values(valores: Mapping[str, Any], caminho: str | Path) -> Path:
    destino = Path(caminho)
    _preparar(destino.parent)
    texto = "".join(f"{chave} = {_formatar(valor)}\n" for chave, valor in valores.items())
    destino.write_text(texto, encoding="utf-8")
    logger.info("Arquivo gravado: %s", destino)
    return destino


def write_params_echo(parametros: Mapping[str, Any], diretorio: str | Path,
                      nome: str = "parametros.txt") -> Path:
    '''Eco no mesmo formato dos arquivos de cenário: pode ser relido por --config.'''
    return write_key_values(parametros, _preparar(diretorio) / nome)


def write_metrics(report: MetricsReport, diretorio: str | Path, rotulo: str = "") -> tuple[Path, Path]:
    destino = _preparar(diretorio)
    sufixo = f"_{rotulo}" if rotulo else ""
    dados = report.as_dict()
    txt = write_key_values(dados, destino / f"metricas{sufixo}.txt")
    tabela = _escrever_csv(destino / f"metricas{sufixo}.csv", list(dados), [list(dados.values())])
    return txt, tabela


def write_comparison(comparacao: Comparison, diretorio: str | Path) -> tuple[Path, Path]:
    '''Métricas lado a lado (uma linha por rótulo e uma de deltas) e o veredito.'''
    destino = _preparar(diretorio)
    campos = list(comparacao.reports[0].as_dict())
    linhas = [
        [rotulo, *relatorio.as_dict().values()]
        for rotulo, relatorio in zip(comparacao.labels, comparacao.reports)
    ]
    linhas.append(["delta", *(comparacao.deltas[c] for c in campos)])
    tabela = _escrever_csv(destino / "comparacao.csv", ["label", *campos], linhas)

    veredito = destino / "veredito.txt"
    veredito.write_text(comparacao.verdict + "\n", encoding="utf-8")
    return tabela, veredito


def read_csv_columns(caminho: str | Path) -> dict[str, np.ndarray]:
    '''Lê um CSV numérico gravado por este módulo como colunas.'''
    origem = Path(caminho)
    if not origem.is_file():
        raise ConfigError({"trace": f"arquivo não encontrado: {origem}"})
    with origem.open(newline="", encoding="utf-8") as arquivo:
        leitor = csv.reader(arquivo)
        try:
            cabecalho = next(leitor)
        except StopIteration:
            raise ConfigError({"trace": f"arquivo vazio: {origem}"}) from None
        try:
            linhas = [[float(v) for v in linha] for linha in leitor if linha]
        except ValueError as exc:
            raise ConfigError({"trace": f"valor não numérico em {origem}: {exc}"}) from None
    dados = np.array(linhas, dtype=float).reshape(len(linhas), len(cabecalho))
    return {nome: dados[:, i] for i, nome in enumerate(cabecalho)}


def read_trace_csv(caminho: str | Path) -> Trace:
    '''Reconstrói um Trace a partir de ``t,W1..Wk,C,Q,queue,delivered,drops``.'''
    colunas = read_csv_columns(caminho)
    obrigatorias = {"t", "C", "Q", "queue", "delivered", "drops"}
    faltando = sorted(obrigatorias - colunas.keys())
    janelas = sorted((n for n in colunas if n.startswith("W")), key=lambda n: int(n[1:]))
    if faltando or not janelas:
        raise ConfigError({"trace": f"colunas ausentes: {', '.join(faltando) or 'W1..Wk'}"})

    k = len(janelas)
    matriz = np.column_stack([colunas[n] for n in janelas])
    return Trace(
        k=k,
        t=colunas["t"].tolist(),
        windows=[tuple(linha) for linha in matriz.tolist()],
        router_C=colunas["C"].tolist(),
        router_Q=colunas["Q"].tolist(),
        queue=[int(v) for v in colunas["queue"]],
        delivered=[int(v) for v in colunas["delivered"]],
        drops=[int(v) for v in colunas["drops"]],
    )

'''Exceções do laboratório.

Os services lançam estas exceções; a CLI converte cada família em um
código de saída (2 para configuração, 3 para falha numérica).
'''

from __future__ import annotations


class BiccLabError(Exception):
    '''Raiz de todas as falhas do laboratório.'''


class ConfigError(BiccLabError):
    '''Configuração inválida. Lista cada chave com problema.'''

    def __init__(self, erros: dict[str, str]) -> None:
        self.erros = dict(erros)
        detalhes = "; ".join(f"{chave}: {msg}" for chave, msg in self.erros.items())
        super().__init__(f"Configuração inválida ({detalhes})")

    @property
    def chaves(self) -> list[str]:
        return list(self.erros)


class DomainError(BiccLabError, ValueError):
    '''Entrada numérica fora do domínio do modelo.'''


class IntegrationError(BiccLabError):
    '''Derivada ou estado não finito durante a integração.'''

    def __init__(self, t: float, indice: int, mensagem: str | None = None) -> None:
        self.t = t
        self.indice = indice
        super().__init__(
            mensagem or f"Valor não finito na componente {indice} em t={t!r}"
        )


class ProtocolError(BiccLabError):
    '''Cabeçalho de congestionamento inválido.'''


class SimulationError(BiccLabError):
    '''Corrupção da fila de eventos do simulador.'''

'''Modelos da aplicação `core`.'''

from .runs import ExecucaoCenario, RelatorioMetricas

__all__ = [
    "ExecucaoCenario",
    "RelatorioMetricas",
]

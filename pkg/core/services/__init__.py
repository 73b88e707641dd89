'''Camada de serviços: modelos, integrador, simulador e métricas.'''

from .run_registry_service import RunRegistryService

__all__ = [
    "RunRegistryService",
]

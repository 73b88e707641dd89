'''Frações com a convenção 0/0 -> 0, comum às cadeias, ao modelo fluido e ao protocolo.'''


def razao(numerador: float, denominador: float) -> float:
    '''``numerador / denominador``, ou 0 quando o denominador é nulo (eixos absorventes).'''
    return 0.0 if denominador == 0.0 else numerador / denominador

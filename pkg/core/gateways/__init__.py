'''Fronteiras de entrada e saída: arquivos de cenário, CSV e formato de fio.'''

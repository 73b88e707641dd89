'''App principal do domínio acadêmico.'''

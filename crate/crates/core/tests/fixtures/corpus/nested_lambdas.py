def make_adders(base):
    def level(k):
        return lambda v: v + k + base
    return level


compose = lambda f: lambda g: lambda x: f(g(x))

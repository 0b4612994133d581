import abc


class Base:
    pass


class View(Base, abc.ABC, object, metaclass=abc.ABCMeta):
    def render(self):
        raise NotImplementedError

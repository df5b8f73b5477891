"""Exceptions shared by the pure and compiled Belga engines."""


class NothingToCut(Exception):
    pass


class NotAdjacent(Exception):
    pass

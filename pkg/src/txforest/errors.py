"""Diagnostics shared by the interpreter layers."""


class Undefined(Exception):
    """A command or expression has no denotation in the current state.

    ``code`` names the failed side condition (``UpAtRoot``,
    ``EmptyComprehension`` and so on); ``message`` is for humans.
    """

    def __init__(self, code: str, message: str = ""):
        self.code = code
        self.message = message or code
        super().__init__(f"{code}: {self.message}" if message else code)

    def __reduce__(self):
        return (type(self), (self.code, self.message))


def undefined(code, message=""):
    return Undefined(code, message)

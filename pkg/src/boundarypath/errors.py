"""Exception types shared across the package."""


class MeshError(Exception):
    pass


class NonManifold(MeshError):
    """A face is shared by more than two elements."""

    def __init__(self, face, owners):
        self.face = tuple(face)
        self.owners = list(owners)
        super().__init__(f"face {self.face} shared by elements {self.owners}")


class ParseError(MeshError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class IndexOutOfRange(MeshError):
    pass


class DegenerateFace(MeshError):
    pass


class ZeroNormal(MeshError):
    pass


class ZeroLengthSegment(ValueError):
    """Query point and candidate boundary point coincide; no ray direction."""


class EmptyBoundary(MeshError):
    pass


class NumericalBlowup(RuntimeError):
    def __init__(self, message, state_dump=None):
        self.state_dump = state_dump
        super().__init__(message)

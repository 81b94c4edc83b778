from tangent_llg import constants


class TangentLLGError(Exception):
    exit_code = constants.EXIT_RUNTIME

    def __init__(self, reason, detail=None):
        super().__init__(reason)
        self.reason = reason
        self.detail = detail

    def __str__(self):
        if self.detail:
            return f"{self.reason} ({self.detail})"
        return self.reason


class InvalidArgument(TangentLLGError):
    exit_code = constants.EXIT_CONFIG


class ConfigError(TangentLLGError):
    exit_code = constants.EXIT_CONFIG


class WellPosednessError(ConfigError):
    def __init__(self, reason, threshold=None, detail=None):
        super().__init__(reason, detail)
        self.threshold = threshold


class MeshLoadError(TangentLLGError):
    exit_code = constants.EXIT_IO

    def __init__(self, reason, line=None, detail=None):
        if line is not None:
            reason = f"line {line}: {reason}"
        super().__init__(reason, detail)
        self.line = line


class DegenerateStateError(TangentLLGError):
    def __init__(self, reason, vertex=None, detail=None):
        if vertex is not None:
            reason = f"{reason} at vertex {vertex}"
        super().__init__(reason, detail)
        self.vertex = vertex


class SolverError(TangentLLGError):
    def __init__(self, reason, report=None, detail=None):
        super().__init__(reason, detail)
        self.report = report


class DiagnosticUnavailable(TangentLLGError):
    pass

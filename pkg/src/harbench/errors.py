"""Exception hierarchy. Each family maps to a stable CLI exit code."""


class HarError(Exception):
    exit_code = 3


class ConfigError(HarError):
    exit_code = 1


class DataError(HarError):
    exit_code = 2


class PipelineError(HarError):
    exit_code = 3


class StageError(PipelineError):
    """Raised by the orchestrator when a stage fails; wraps the cause."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
        if isinstance(cause, HarError):
            self.exit_code = cause.exit_code

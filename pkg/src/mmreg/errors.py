"""Exception types shared across the registration pipeline."""


class StageError(RuntimeError):
    """An error raised while executing a named pipeline stage.

    The message is prefixed with the stage name so CLI users can tell
    which part of the workflow rejected their inputs.
    """

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message

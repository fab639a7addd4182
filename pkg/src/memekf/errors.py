class MemEkfError(Exception):
    pass


class SingularInnovation(MemEkfError):
    """An innovation covariance failed the condition-number guard.

    ``which`` names the matrix (``"C_y"``, ``"C_Y"`` or ``"rm_S"``);
    ``detection_index`` is set when raised from a batch update.
    """

    def __init__(self, which: str, cond: float, detection_index: int | None = None):
        self.which = which
        self.cond = cond
        self.detection_index = detection_index
        where = "" if detection_index is None else f" at detection {detection_index}"
        super().__init__(f"{which} not invertible (condition number {cond:.3g}){where}")


class DimensionMismatch(MemEkfError):
    pass


class ScenarioError(MemEkfError):
    pass

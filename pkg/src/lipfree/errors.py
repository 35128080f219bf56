"""Exception hierarchy.

Every domain failure raised by the package derives from :class:`LipFreeError`,
so callers (and the CLI) can separate domain errors from programming errors.
"""

from __future__ import annotations


class LipFreeError(ValueError):
    """Base class for all domain errors."""

    def to_dict(self) -> dict:
        out = {"error": type(self).__name__, "message": str(self)}
        for key, value in vars(self).items():
            if not key.startswith("_"):
                out[key] = value
        return out


# -- metric validation -------------------------------------------------------


class ValidationError(LipFreeError):
    """The input matrix is not a valid finite pointed metric."""


class NotSquareError(ValidationError):
    pass


class NonFiniteEntry(ValidationError):
    pass


class NonZeroDiagonal(ValidationError):
    pass


class AsymmetryError(ValidationError):
    def __init__(self, i: int, j: int, defect: float):
        self.i, self.j, self.defect = int(i), int(j), float(defect)
        super().__init__(f"|d[{i}][{j}] - d[{j}][{i}]| = {defect:.6g} exceeds tolerance")


class TriangleViolation(ValidationError):
    """``d(i, k) > d(i, j) + d(j, k)`` beyond tolerance; reports the worst triple."""

    def __init__(self, i: int, j: int, k: int, defect: float):
        self.i, self.j, self.k, self.defect = int(i), int(j), int(k), float(defect)
        super().__init__(
            f"triangle inequality fails at ({i},{k}) via {j}: defect {defect:.6g}"
        )


class DuplicatePoint(ValidationError):
    def __init__(self, i: int, j: int):
        self.i, self.j = int(i), int(j)
        super().__init__(f"points {i} and {j} are at distance zero")


class BadBaseIndex(ValidationError):
    pass


# -- operations ----------------------------------------------------------------


class DegeneratePair(LipFreeError):
    pass


class SingletonSpace(LipFreeError):
    pass


class NotLLipschitzOnSubset(LipFreeError):
    def __init__(self, x: int, y: int, slope: float, bound: float):
        self.x, self.y, self.slope, self.bound = int(x), int(y), float(slope), float(bound)
        super().__init__(
            f"prescribed data has slope {slope:.12g} at ({x},{y}), above {bound:.12g}"
        )


class PairConditionViolated(LipFreeError):
    def __init__(self, x: int, y: int, lhs: float, rhs: float):
        self.x, self.y, self.lhs, self.rhs = int(x), int(y), float(lhs), float(rhs)
        super().__init__(
            f"pair condition fails at ({x},{y}): {lhs:.12g} > {rhs:.12g}"
        )


class PointsInSubset(LipFreeError):
    pass


class NormOverflow(LipFreeError):
    def __init__(self, norm: float, flagged: list[int]):
        self.norm, self.flagged = float(norm), list(flagged)
        super().__init__(
            f"constructed function has Lipschitz norm {norm:.12g} > 1 "
            f"({len(flagged)} point(s) fell outside both branches)"
        )


class BallsOverlap(LipFreeError):
    def __init__(self, i: int, j: int):
        self.i, self.j = int(i), int(j)
        super().__init__(f"balls {i} and {j} share a point")


class PrescriptionNotLipschitz(LipFreeError):
    def __init__(self, index: int, x: int, y: int, slope: float):
        self.index, self.x, self.y, self.slope = int(index), int(x), int(y), float(slope)
        super().__init__(
            f"prescription {index} has slope {slope:.12g} at ({x},{y})"
        )


class UnbalancedChain(LipFreeError):
    pass


class NotNormalized(LipFreeError):
    pass


class NotBetween(LipFreeError):
    pass


class CriteriaDisagreement(LipFreeError):
    """Internal-consistency failure between the pair classification criteria."""

    def __init__(self, x: int, y: int, z_margin: float, inf_xy: float, inf_yx: float,
                 segment_size: int):
        self.x, self.y = int(x), int(y)
        self.z_margin, self.inf_xy, self.inf_yx = float(z_margin), float(inf_xy), float(inf_yx)
        self.segment_size = int(segment_size)
        super().__init__(
            f"criteria disagree at ({x},{y}): z-margin {z_margin:.6g}, "
            f"gromov infima {inf_xy:.6g}/{inf_yx:.6g}, segment size {segment_size}"
        )


class NotNormOne(LipFreeError):
    pass


class NotSlopeOneAtPair(LipFreeError):
    pass


class PreconditionSlope(LipFreeError):
    pass


class ScaleBelowMesh(LipFreeError):
    pass


# -- gallery / io ----------------------------------------------------------------


class BadSpec(LipFreeError):
    pass


class ParseError(LipFreeError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 position: int | None = None):
        self.line, self.column, self.position = line, column, position
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)

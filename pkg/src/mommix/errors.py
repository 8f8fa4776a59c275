"""Exception hierarchy. Every error carries a short machine-readable code
that the CLI surfaces as ``error[<code>]`` with a nonzero exit status."""


class MommixError(Exception):
    code = "error"


# numerical kernel errors
class DimensionMismatch(MommixError):
    code = "dimension_mismatch"


class DegenerateWeights(MommixError):
    code = "degenerate_weights"


class RankDeficient(MommixError):
    code = "rank_deficient"


class NonFiniteEvaluation(MommixError):
    code = "non_finite_evaluation"


# estimator errors
class InvalidData(MommixError):
    code = "invalid_data"


class NonIdentifiable(MommixError):
    code = "non_identifiable"


class DegenerateMixture(MommixError):
    code = "degenerate_mixture"


class DegenerateComponent(MommixError):
    code = "degenerate_component"


class InvalidBound(MommixError):
    code = "invalid_bound"


# CLI errors
class FileNotFound(MommixError):
    code = "file_not_found"


class ColumnNotFound(MommixError):
    code = "column_not_found"


class ParseError(MommixError):
    code = "parse_error"

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column

    def __str__(self):
        base = super().__str__()
        where = [f"row {self.row}" if self.row is not None else None,
                 f"column {self.column}" if self.column is not None else None]
        where = [part for part in where if part]
        return f"{base} ({', '.join(where)})" if where else base

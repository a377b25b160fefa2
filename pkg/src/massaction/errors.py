"""Exception hierarchy.

Input problems (bad files, bad tables, bad geometry) derive from
:class:`InputError`; problems that only show up while a model is running
derive from :class:`SimulationError`.  The CLI maps the two families onto
exit codes 2 and 3.
"""


class MassActionError(Exception):
    pass


class InputError(MassActionError):
    pass


class SimulationError(MassActionError):
    pass


class ParseError(InputError):
    """Malformed automaton or scenario text."""

    def __init__(self, message, line=None):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class NonStochasticRow(InputError):
    def __init__(self, row, total):
        self.row = row
        self.total = total
        super().__init__(f"row {row} sums to {total!r}, expected 1")


class NegativeEntry(InputError):
    def __init__(self, row, value):
        self.row = row
        self.value = value
        super().__init__(f"row {row} has a negative entry {value!r}")


class DuplicateSpecies(InputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"species {name!r} listed more than once")


class EmptySpecies(InputError):
    pass


class NonStochasticJoint(InputError):
    def __init__(self, total):
        self.total = total
        super().__init__(f"joint outcome table sums to {total!r}, expected 1")


class DimensionMismatch(InputError):
    pass


class InvalidGeometry(InputError):
    pass


class UnknownSpecies(InputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown species {name!r}")


class RegionOutOfBounds(InputError):
    pass


class MissingField(InputError):
    def __init__(self, section, key):
        self.section = section
        self.key = key
        super().__init__(f"missing field {key!r} in [{section}]")


class NegativeConcentration(SimulationError):
    def __init__(self, species, value, step=None):
        self.species = species
        self.value = value
        self.step = step
        at = f" at step {step}" if step is not None else ""
        super().__init__(
            f"concentration of species {species} went negative ({value!r}){at}")


class NoConvergence(SimulationError):
    def __init__(self, max_iter, residual):
        self.max_iter = max_iter
        self.residual = residual
        super().__init__(
            f"no fixed point within {max_iter} iterations "
            f"(last residual {residual:.3e})")

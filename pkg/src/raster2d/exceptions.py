"""Exception types raised across the package."""


class Raster2DError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(Raster2DError, ValueError):
    pass


class SingularBeamError(InvalidParameterError):
    """A beam with zero waist has no finite diffraction angle."""


class ConfigError(Raster2DError, ValueError):
    """A configuration file could not be parsed or is missing a field."""

    def __init__(self, message, *, path=None, field=None, line=None):
        self.path = path
        self.field = field
        self.line = line
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ", ".join(where) + ": " if where else ""
        super().__init__(prefix + message)


class GridResolutionError(Raster2DError, ValueError):
    """The sampling grid cannot resolve the phase gradient of the field."""


class NoCrossingError(Raster2DError, ValueError):
    """The scanned spot never crosses the knife edge."""


class ResolutionExceededError(Raster2DError, ValueError):
    def __init__(self, axis, requested, available):
        self.axis = axis
        self.requested = requested
        self.available = available
        super().__init__(
            f"{axis} axis needs {requested} resolvable spots but only "
            f"{available:g} are available (exceeded by {requested - available:g})"
        )


class ToneOutOfBandError(Raster2DError, ValueError):
    def __init__(self, row, frequency, band):
        self.row = row
        self.frequency = frequency
        self.band = band
        super().__init__(
            f"row {row} needs a sideband at {frequency:.6g} Hz, outside the "
            f"modulator band [{band[0]:.6g}, {band[1]:.6g}] Hz"
        )

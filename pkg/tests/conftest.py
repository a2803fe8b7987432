import pytest

from raster2d.config import load_device
from raster2d.device_model import (
    AodSpec,
    BeamSpec,
    DaodSpec,
    DeviceSpec,
    EomSpec,
    RelaySpec,
    VipaSpec,
)

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def paper_device():
    return load_device("brimrose_ted150")


@pytest.fixture(scope="session")
def full_band_device():
    return load_device("brimrose_ted150_full_band")


def make_device(v=4200.0, w0=0.9e-3, aperture=None, usable=36e6, full=100e6,
                fsr=50e9, fwhm=1.2e9, eom=(0.1e9, 50e9), wavelength=785e-9):
    aod = AodSpec(v, aperture if aperture is not None else 2 * w0, 150e6, full, usable, 0.5)
    return DeviceSpec(
        beam=BeamSpec(wavelength, w0),
        slow_axis=DaodSpec(aod, 0.25),
        fast_axis=VipaSpec(fsr, fwhm, 0.95, 2e-3),
        eom=EomSpec(*eom, 0.3),
        relay=RelaySpec(30e-3),
    )


@pytest.fixture
def device_factory():
    return make_device


@pytest.fixture
def acceptance_record():
    def record(criterion, passed, detail):
        ACCEPTANCE_RESULTS.append((criterion, passed, detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")

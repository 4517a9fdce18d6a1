"""Built-in platforms, floats, mooring layouts and the eleven system configurations."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import aero
from .hydro import DragModel
from .mooring import LineProps, MooringLayout

COEFF_DIR = Path(__file__).parent / "data" / "coefficients"
RHO = 1025.0


class CatalogError(KeyError):
    pass


@dataclass(frozen=True)
class PlatformSpec:
    name: str
    kind: str                    # "spar" | "semisub" | "rm3"
    coefficients: str            # file name in the coefficient directory or a path
    cog_z: float                 # hull centre of mass below SWL (negative)
    gyration_roll: float         # hull radius of gyration about its CM, roll/pitch
    gyration_yaw: float
    drag: tuple = (0.0,) * 6     # quadratic drag per DOF, N/(m/s)^2 family
    reaction_plate: bool = False
    plate_radius: float = 0.0
    plate_cd: float = 3.0

    def drag_model(self, rho=RHO):
        d = DragModel(np.asarray(self.drag, float))
        if self.reaction_plate:
            d = d + DragModel.from_cd(rho, [0, 0, self.plate_cd * np.pi * self.plate_radius ** 2, 0, 0, 0])
        return d


@dataclass(frozen=True)
class FloatSpec:
    name: str
    coefficients: str
    outer_diameter: float
    inner_diameter: float
    height: float
    draft: float
    cog_z: float
    pto_damping: float = 1.2e6
    natural_period: float = 0.0
    heave_cd: float = 1.0
    rated_power: float = 286e3
    efficiency: float = 0.8

    def drag_model(self, rho=RHO):
        area = np.pi / 4 * (self.outer_diameter ** 2 - self.inner_diameter ** 2)
        return DragModel.from_cd(rho, [0, 0, self.heave_cd * area, 0, 0, 0])


FLOAT1 = FloatSpec("float1", "float1.json", 22.0, 6.5, 5.0, 3.0, -0.72, 1.2e6, 6.23)
FLOAT2 = FloatSpec("float2", "float2.json", 30.0, 10.0, 8.0, 5.0, -1.35, 1.2e6, 6.12)


def _half_rho_cd(cd, area):
    return 0.5 * RHO * cd * area


SPAR5 = PlatformSpec("spar5", "spar", "spar5.json", -90.0, 23.8, 4.69,
                     drag=(_half_rho_cd(0.6, 9.4 * 108 + 7.95 * 8 + 6.5 * 4),) * 2
                     + (_half_rho_cd(1.0, np.pi * 4.7 ** 2), 0.0, 0.0, 0.0))
SPAR5_RP = replace(SPAR5, name="spar5_rp", coefficients="spar5_rp.json", reaction_plate=True, plate_radius=25.0)
SPAR15 = PlatformSpec("spar15", "spar", "spar15.json", -100.0, 23.8, 9.0,
                      drag=(_half_rho_cd(0.6, 18 * 102 + 14 * 10 + 10 * 8),) * 2
                      + (_half_rho_cd(1.0, np.pi * 9.0 ** 2), 0.0, 0.0, 0.0))
SPAR15_RP = replace(SPAR15, name="spar15_rp", coefficients="spar15_rp.json", reaction_plate=True,
                    plate_radius=30.0)
SEMI5 = PlatformSpec("semi5", "semisub", "semi5.json", -13.46, 22.5, 30.2,
                     drag=(_half_rho_cd(0.6, 6.5 * 20 + 3 * (12 * 14 + 24 * 6)),) * 2
                     + (_half_rho_cd(4.8, 3 * np.pi * 12.0 ** 2), 0.0, 0.0, 0.0))
SEMI15 = PlatformSpec("semi15", "semisub", "semi15.json", -14.0, 39.2, 52.5,
                      drag=(_half_rho_cd(0.6, 10 * 20 + 3 * (20 * 14 + 40 * 6)),) * 2
                      + (_half_rho_cd(4.8, 3 * np.pi * 20.0 ** 2), 0.0, 0.0, 0.0))
RM3_SPAR = PlatformSpec("rm3_spar", "rm3", "rm3_spar.json", -28.0, 10.4, 5.7,
                        drag=(_half_rho_cd(0.6, 6 * 34),) * 2 + (0.0, 0.0, 0.0, 0.0),
                        reaction_plate=True, plate_radius=15.0)

PLATFORMS = {p.name: p for p in (SPAR5, SPAR5_RP, SPAR15, SPAR15_RP, SEMI5, SEMI15, RM3_SPAR)}
FLOATS = {f.name: f for f in (FLOAT1, FLOAT2)}

# mooring line properties (spar, semi-submersible, point absorber)
SPAR_LINE = LineProps(902.2, 0.09, 77.71, 71.16, 384.2e6)
SEMI_LINE = LineProps(835.5, 0.0766, 113.35, 108.63, 753.6e6)
RM3_LINE = LineProps(280.0, 0.144, 126.0, 115.0, 583.4e6)
AZ = (180.0, 60.0, 300.0)

MOORINGS = {
    "spar5": MooringLayout(AZ, 320.0, 70.0, 853.87, 5.2, SPAR_LINE),
    "spar15": MooringLayout(AZ, 320.0, 70.0, 853.87, 9.0, SPAR_LINE),
    "semi5": MooringLayout(AZ, 200.0, 14.0, 837.6, 40.868, SEMI_LINE),
    "semi15": MooringLayout(AZ, 200.0, 14.0, 837.6, 60.2, SEMI_LINE),
    "rm3": MooringLayout(AZ, 70.0, 11.5, 250.0, 3.0, RM3_LINE),
}


@dataclass(frozen=True)
class SystemConfig:
    name: str
    platform: PlatformSpec
    mooring: MooringLayout
    turbine: aero.TurbineSpec | None = None
    float: FloatSpec | None = None
    pto_damping: float | None = None
    water_depth: float | None = None
    mooring_model: str = "lumped"
    coeff_dir: str = str(COEFF_DIR)
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.pto_damping is not None and self.pto_damping < 0:
            raise ValueError("pto_damping must be >= 0")

    @property
    def c_pto(self):
        if self.float is None:
            return 0.0
        return self.float.pto_damping if self.pto_damping is None else self.pto_damping

    @property
    def depth(self):
        return self.mooring.anchor_depth if self.water_depth is None else self.water_depth

    @property
    def n_dof(self):
        return 6 + (self.float is not None)

    def coeff_path(self, name):
        p = Path(name)
        return p if p.is_absolute() or p.exists() else Path(self.coeff_dir) / name

    @property
    def devices(self):
        """Device names reported per system ("wec", "wt")."""
        out = []
        if self.float is not None:
            out.append("wec")
        if self.turbine is not None:
            out.append("wt")
        return out


def _system(name, platform, mooring, turbine=None, flt=None):
    return SystemConfig(name, PLATFORMS[platform], MOORINGS[mooring], turbine, flt)


SYSTEMS = {s.name: s for s in [
    _system("standalone-rm3", "rm3_spar", "rm3", None, FLOAT1),
    _system("fwt-5mw-spar", "spar5", "spar5", aero.NREL_5MW),
    _system("fwt-5mw-ss", "semi5", "semi5", aero.NREL_5MW),
    _system("fwt-15mw-spar", "spar15", "spar15", aero.IEA_15MW),
    _system("fwt-15mw-ss", "semi15", "semi15", aero.IEA_15MW),
    _system("hybrid-5mw-spar", "spar5", "spar5", aero.NREL_5MW, FLOAT1),
    _system("hybrid-5mw-spar-rp", "spar5_rp", "spar5", aero.NREL_5MW, FLOAT1),
    _system("hybrid-5mw-ss", "semi5", "semi5", aero.NREL_5MW, FLOAT1),
    _system("hybrid-15mw-spar", "spar15", "spar15", aero.IEA_15MW, FLOAT2),
    _system("hybrid-15mw-spar-rp", "spar15_rp", "spar15", aero.IEA_15MW, FLOAT2),
    _system("hybrid-15mw-ss", "semi15", "semi15", aero.IEA_15MW, FLOAT2),
]}

HYBRIDS = [n for n in SYSTEMS if n.startswith("hybrid-")]

# wave conditions used for the dynamic comparisons: (period s, height m)
RUNS = {"run1": (6.5, 1.75), "run2": (10.5, 3.75), "run3": (14.5, 6.75)}


def get_system(name) -> SystemConfig:
    try:
        return SYSTEMS[name]
    except KeyError:
        raise CatalogError(f"unknown system {name!r}; known: {', '.join(SYSTEMS)}") from None


def standalone_pair(name):
    """(standalone WEC, standalone FWT) names matching a hybrid system."""
    parts = name.split("-")
    if parts[0] != "hybrid":
        raise CatalogError(f"{name} is not a hybrid system")
    rating, plat = parts[1], parts[2]
    return "standalone-rm3", f"fwt-{rating}-{plat}"

"""Antenna array architectures, element pattern and analog feeder network.

Five dual-polarized planar arrays are supported.  All of them live on the
same physical grid of subarray columns and rows; the smaller types are
obtained either by switching off elements inside each subarray (E, F) or
by switching off whole subarray rows (K, L):

    type   elements  ports  per-port elements (one polarization)
    A      256       64     4 (vertical slots 0,1,2,3)
    E      128       64     2 (slots 0,2 - aperture preserved)
    F      64        64     1 (slot 0)
    K      128       32     4, half the subarray rows
    L      64        16     4, quarter of the subarray rows

Each subarray carries two co-located ports (one per +/-45 deg slant).
The analog feeder splits a port signal equally over its subarray
elements with zero electrical tilt; all tilt is mechanical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ARRAY_TYPES = ("A", "E", "F", "K", "L")

# (elements, ports, subarray size) per Fig.-3-style catalog.
CATALOG = {
    "A": (256, 64, 4),
    "E": (128, 64, 2),
    "F": (64, 64, 1),
    "K": (128, 32, 4),
    "L": (64, 16, 4),
}

# Vertical element slots used inside a 4-slot subarray cell, per type.
_SLOT_OFFSETS = {
    "A": (0, 1, 2, 3),
    "E": (0, 2),
    "F": (0,),
    "K": (0, 1, 2, 3),
    "L": (0, 1, 2, 3),
}

# Fraction of subarray rows that stay powered (reduction of whole subarrays).
_ROW_FRACTION = {"A": 1, "E": 1, "F": 1, "K": 2, "L": 4}

_SUB_SLOTS = 4  # vertical element slots per subarray cell on the full grid


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ElementPattern:
    """Parabolic-in-dB sectorized element pattern."""

    hpbw_az: float = 60.0
    hpbw_el: float = 60.0
    max_gain: float = 8.0
    front_back_ratio: float = 30.0


def element_gain_db(pattern: ElementPattern, azimuth, zenith):
    """Element gain (dBi) at local angles; boresight is (az=0, zen=90).

    Per-plane parabolic attenuation 12*(angle/HPBW)^2, each plane and the
    sum floored at the front-back ratio.
    """
    az = np.asarray(azimuth, dtype=float)
    zen = np.asarray(zenith, dtype=float)
    fbr = pattern.front_back_ratio
    att_az = np.minimum(12.0 * (az / pattern.hpbw_az) ** 2, fbr)
    att_el = np.minimum(12.0 * ((zen - 90.0) / pattern.hpbw_el) ** 2, fbr)
    gain = pattern.max_gain - np.minimum(att_az + att_el, fbr)
    return gain if gain.shape else float(gain)


@dataclass(frozen=True)
class ArrayGeometry:
    """Shared mounting parameters (not fixed by the array type)."""

    grid_cols: int = 8          # subarray columns
    grid_rows: int = 4          # subarray rows of the full-size array
    spacing_h_lambda: float = 0.5
    spacing_v_lambda: float = 0.5
    downtilt_deg: float = 12.0
    pattern: ElementPattern = field(default_factory=ElementPattern)


@dataclass(frozen=True, eq=False)
class ArrayConfig:
    type_id: str
    n_elements: int
    n_ports: int
    subarray_size: int
    element_positions: np.ndarray      # (N, 3) in wavelengths, local frame
    element_polarizations: np.ndarray  # (N,) slant angle, +45/-45
    mech_downtilt: float
    element_spacing: tuple[float, float]
    pattern: ElementPattern
    # Grid bookkeeping (port-major element order: port p owns elements
    # p*Ms .. p*Ms+Ms-1).
    elem_col: np.ndarray        # (N,) subarray column index
    elem_zslot: np.ndarray      # (N,) vertical slot index on the full grid
    elem_pol_idx: np.ndarray    # (N,) 0 = +45, 1 = -45
    grid_y: np.ndarray          # unique column y coordinates (wavelengths)
    grid_z: np.ndarray          # y/z coordinates of the slots this type uses
    elem_grid_idx: np.ndarray   # (N,) index into the (grid_y x grid_z) table


@dataclass(frozen=True, eq=False)
class FeederNetwork:
    """Fixed analog precoder: N x P, each port split equally over its subarray."""

    weights: np.ndarray


def build_array(type_id: str, geometry: ArrayGeometry | None = None) -> ArrayConfig:
    """Construct a catalog array on the shared physical grid."""
    if type_id not in CATALOG:
        raise ConfigurationError(f"unknown array type {type_id!r}; expected one of {ARRAY_TYPES}")
    geom = geometry or ArrayGeometry()
    n_elem, n_ports, m_s = CATALOG[type_id]
    offsets = _SLOT_OFFSETS[type_id]
    if geom.grid_rows % _ROW_FRACTION[type_id]:
        raise ConfigurationError(
            f"grid_rows={geom.grid_rows} not divisible by {_ROW_FRACTION[type_id]} (type {type_id})")
    sub_rows = geom.grid_rows // _ROW_FRACTION[type_id]

    built = geom.grid_cols * sub_rows * 2 * len(offsets)
    if built != n_elem or geom.grid_cols * sub_rows * 2 != n_ports:
        raise ConfigurationError(
            f"grid {geom.grid_cols}x{geom.grid_rows} cannot realize type {type_id} "
            f"({built} elements vs catalog {n_elem})")

    nz_full = geom.grid_rows * _SUB_SLOTS
    y_all = (np.arange(geom.grid_cols) - (geom.grid_cols - 1) / 2.0) * geom.spacing_h_lambda
    z_all = (np.arange(nz_full) - (nz_full - 1) / 2.0) * geom.spacing_v_lambda

    cols, zslots, pols = [], [], []
    # Port order: (subarray row, column, polarization); element order inside
    # a port follows the slot offsets.
    for row in range(sub_rows):
        for col in range(geom.grid_cols):
            for pol in (0, 1):
                for off in offsets:
                    cols.append(col)
                    zslots.append(row * _SUB_SLOTS + off)
                    pols.append(pol)
    elem_col = np.array(cols, dtype=np.int64)
    elem_zslot = np.array(zslots, dtype=np.int64)
    elem_pol_idx = np.array(pols, dtype=np.int64)

    used_slots = np.unique(elem_zslot)
    slot_rank = {int(s): i for i, s in enumerate(used_slots)}
    grid_z = z_all[used_slots]
    elem_grid_idx = elem_col * len(used_slots) + np.array(
        [slot_rank[int(s)] for s in elem_zslot], dtype=np.int64)

    positions = np.zeros((n_elem, 3))
    positions[:, 1] = y_all[elem_col]
    positions[:, 2] = z_all[elem_zslot]

    return ArrayConfig(
        type_id=type_id,
        n_elements=n_elem,
        n_ports=n_ports,
        subarray_size=m_s,
        element_positions=positions,
        element_polarizations=np.where(elem_pol_idx == 0, 45.0, -45.0),
        mech_downtilt=geom.downtilt_deg,
        element_spacing=(geom.spacing_h_lambda, geom.spacing_v_lambda),
        pattern=geom.pattern,
        elem_col=elem_col,
        elem_zslot=elem_zslot,
        elem_pol_idx=elem_pol_idx,
        grid_y=y_all,
        grid_z=grid_z,
        elem_grid_idx=elem_grid_idx,
    )


def feeder_matrix(array: ArrayConfig) -> FeederNetwork:
    """N x P feeder: weight 1/sqrt(Ms) on each subarray element, zero elsewhere."""
    n, p, m_s = array.n_elements, array.n_ports, array.subarray_size
    w = np.zeros((n, p), dtype=np.complex128)
    rows = np.arange(n)
    w[rows, rows // m_s] = 1.0 / np.sqrt(m_s)
    return FeederNetwork(weights=w)


def direction_unit_vector(az_deg, zen_deg) -> np.ndarray:
    """Unit vector(s) for azimuth/zenith in degrees; zenith from +z."""
    az = np.deg2rad(np.asarray(az_deg, dtype=float))
    zen = np.deg2rad(np.asarray(zen_deg, dtype=float))
    sz = np.sin(zen)
    return np.stack([sz * np.cos(az), sz * np.sin(az), np.cos(zen)], axis=-1)


def rotation_to_local(bearing_deg: float, downtilt_deg: float) -> np.ndarray:
    """Rotation matrix mapping global vectors into the panel-local frame.

    The panel bore points at azimuth `bearing_deg`, tilted down by
    `downtilt_deg`; locally the bore is +x and the panel spans y-z.
    """
    a = np.deg2rad(bearing_deg)
    d = np.deg2rad(downtilt_deg)
    rz = np.array([[np.cos(a), np.sin(a), 0.0],
                   [-np.sin(a), np.cos(a), 0.0],
                   [0.0, 0.0, 1.0]])
    ry = np.array([[np.cos(d), 0.0, -np.sin(d)],
                   [0.0, 1.0, 0.0],
                   [np.sin(d), 0.0, np.cos(d)]])
    return ry @ rz


def local_angles(u_local: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(azimuth, zenith) in degrees of local-frame unit vectors."""
    u = np.asarray(u_local, dtype=float)
    az = np.rad2deg(np.arctan2(u[..., 1], u[..., 0]))
    zen = np.rad2deg(np.arccos(np.clip(u[..., 2], -1.0, 1.0)))
    return az, zen


def port_array_response(array: ArrayConfig, feeder: FeederNetwork,
                        direction: tuple[float, float],
                        wavelength: float = 1.0) -> np.ndarray:
    """Complex per-port response toward (azimuth, zenith), degrees.

    Direction is given in the mounting frame (azimuth 0 = bore azimuth,
    zenith from vertical); the mechanical downtilt is applied here.
    Element phases follow the planar wavefront across the (y, z) panel;
    geometry is fixed in wavelengths so the response is carrier-agnostic.
    """
    rot = rotation_to_local(0.0, array.mech_downtilt)
    u_loc = rot @ direction_unit_vector(*direction)
    az_l, zen_l = local_angles(u_loc)
    amp = 10.0 ** (element_gain_db(array.pattern, az_l, zen_l) / 20.0)
    pos_m = array.element_positions * wavelength
    phase = 2.0 * np.pi / wavelength * (pos_m @ u_loc)
    steering = amp * np.exp(1j * phase)
    return feeder.weights.T @ steering

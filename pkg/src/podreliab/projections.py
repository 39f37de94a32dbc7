"""Transverse-Mercator projection between geographic and planar coordinates.

Forward and inverse mappings use the Krueger series in terms of the third
flattening n, carried to n^6, which is accurate to well below a millimeter
anywhere within a UTM zone. All internal pipeline math runs on the projected
easting/northing in meters; this module is only touched when AIS records
arrive as latitude/longitude or when synthetic tracks are exported with
geographic columns.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563

UTM_SCALE = 0.9996
UTM_FALSE_EASTING = 500000.0
UTM_FALSE_NORTHING_SOUTH = 10000000.0


@dataclass(frozen=True)
class TMZone:
    """Transverse-Mercator zone: central meridian plus grid offsets."""

    central_meridian_deg: float
    scale: float = UTM_SCALE
    false_easting: float = UTM_FALSE_EASTING
    false_northing: float = 0.0

    @classmethod
    def utm(cls, zone_number, northern=True):
        if not 1 <= int(zone_number) <= 60:
            raise InputError(f"UTM zone out of range 1..60: {zone_number}")
        return cls(
            central_meridian_deg=-183.0 + 6.0 * int(zone_number),
            false_northing=0.0 if northern else UTM_FALSE_NORTHING_SOUTH,
        )


# Rhine corridor sits in UTM zone 32N; used when a config names no zone.
DEFAULT_ZONE = TMZone.utm(32)

_N = WGS84_F / (2.0 - WGS84_F)

# Rectifying radius A and the forward (alpha) / inverse (beta) series
# coefficients of the Krueger expansion, order n^6.
_A_RECT = WGS84_A / (1.0 + _N) * (
    1.0 + _N**2 / 4.0 + _N**4 / 64.0 + _N**6 / 256.0
)

_ALPHA = np.array([
    _N / 2.0 - 2.0 * _N**2 / 3.0 + 5.0 * _N**3 / 16.0 + 41.0 * _N**4 / 180.0
    - 127.0 * _N**5 / 288.0 + 7891.0 * _N**6 / 37800.0,
    13.0 * _N**2 / 48.0 - 3.0 * _N**3 / 5.0 + 557.0 * _N**4 / 1440.0
    + 281.0 * _N**5 / 630.0 - 1983433.0 * _N**6 / 1935360.0,
    61.0 * _N**3 / 240.0 - 103.0 * _N**4 / 140.0 + 15061.0 * _N**5 / 26880.0
    + 167603.0 * _N**6 / 181440.0,
    49561.0 * _N**4 / 161280.0 - 179.0 * _N**5 / 168.0
    + 6601661.0 * _N**6 / 7257600.0,
    34729.0 * _N**5 / 80640.0 - 3418889.0 * _N**6 / 1995840.0,
    212378941.0 * _N**6 / 319334400.0,
])

_BETA = np.array([
    _N / 2.0 - 2.0 * _N**2 / 3.0 + 37.0 * _N**3 / 96.0 - _N**4 / 360.0
    - 81.0 * _N**5 / 512.0 + 96199.0 * _N**6 / 604800.0,
    _N**2 / 48.0 + _N**3 / 15.0 - 437.0 * _N**4 / 1440.0
    + 46.0 * _N**5 / 105.0 - 1118711.0 * _N**6 / 3870720.0,
    17.0 * _N**3 / 480.0 - 37.0 * _N**4 / 840.0 - 209.0 * _N**5 / 4480.0
    + 5569.0 * _N**6 / 90720.0,
    4397.0 * _N**4 / 161280.0 - 11.0 * _N**5 / 504.0
    - 830251.0 * _N**6 / 7257600.0,
    4583.0 * _N**5 / 161280.0 - 108847.0 * _N**6 / 3991680.0,
    20648693.0 * _N**6 / 638668800.0,
])

_E = np.sqrt(WGS84_F * (2.0 - WGS84_F))
_J = np.arange(1, 7)


def tm_forward(lat_deg, lon_deg, zone=DEFAULT_ZONE):
    """Project geographic coordinates to (easting, northing) in meters.

    Accepts scalars or arrays; latitudes must lie strictly inside
    (-90, 90) degrees.
    """
    lat = np.asarray(lat_deg, dtype=float)
    lon = np.asarray(lon_deg, dtype=float)
    if np.any(~np.isfinite(lat)) or np.any(~np.isfinite(lon)):
        raise InputError("non-finite latitude/longitude")
    if np.any(np.abs(lat) >= 90.0):
        raise InputError("latitude out of range (-90, 90)")

    phi = np.radians(lat)
    lam = np.radians(lon - zone.central_meridian_deg)
    lam = np.arctan2(np.sin(lam), np.cos(lam))

    # Gauss-Schreiber step: conformal latitude via tau' = tau*sqrt(1+sigma^2)
    # - sigma*sqrt(1+tau^2), then rotate onto the sphere.
    tau = np.tan(phi)
    sigma = np.sinh(_E * np.arctanh(_E * tau / np.hypot(1.0, tau)))
    taup = tau * np.hypot(1.0, sigma) - sigma * np.hypot(1.0, tau)
    xi_p = np.arctan2(taup, np.cos(lam))
    eta_p = np.arcsinh(np.sin(lam) / np.hypot(taup, np.cos(lam)))

    arg_xi = 2.0 * np.multiply.outer(_J, xi_p)
    arg_eta = 2.0 * np.multiply.outer(_J, eta_p)
    shape = (6,) + (1,) * xi_p.ndim
    alpha = _ALPHA.reshape(shape)
    xi = xi_p + np.sum(alpha * np.sin(arg_xi) * np.cosh(arg_eta), axis=0)
    eta = eta_p + np.sum(alpha * np.cos(arg_xi) * np.sinh(arg_eta), axis=0)

    easting = zone.false_easting + zone.scale * _A_RECT * eta
    northing = zone.false_northing + zone.scale * _A_RECT * xi
    if np.ndim(lat_deg) == 0 and np.ndim(lon_deg) == 0:
        return float(easting), float(northing)
    return easting, northing


def tm_inverse(easting, northing, zone=DEFAULT_ZONE):
    """Map (easting, northing) in meters back to (lat, lon) in degrees."""
    x = np.asarray(easting, dtype=float)
    y = np.asarray(northing, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(~np.isfinite(y)):
        raise InputError("non-finite easting/northing")

    eta = (x - zone.false_easting) / (zone.scale * _A_RECT)
    xi = (y - zone.false_northing) / (zone.scale * _A_RECT)

    arg_xi = 2.0 * np.multiply.outer(_J, xi)
    arg_eta = 2.0 * np.multiply.outer(_J, eta)
    shape = (6,) + (1,) * np.ndim(xi)
    beta = _BETA.reshape(shape)
    xi_p = xi - np.sum(beta * np.sin(arg_xi) * np.cosh(arg_eta), axis=0)
    eta_p = eta - np.sum(beta * np.cos(arg_xi) * np.sinh(arg_eta), axis=0)

    taup = np.sin(xi_p) / np.hypot(np.sinh(eta_p), np.cos(xi_p))
    lam = np.arctan2(np.sinh(eta_p), np.cos(xi_p))

    # Newton iteration inverting tau -> tau'; converges in a few steps.
    e2m = 1.0 - _E * _E
    tau = taup / e2m
    for _ in range(6):
        sigma = np.sinh(_E * np.arctanh(_E * tau / np.hypot(1.0, tau)))
        taupa = tau * np.hypot(1.0, sigma) - sigma * np.hypot(1.0, tau)
        dtau = (
            (taup - taupa)
            * (1.0 + e2m * tau * tau)
            / (e2m * np.hypot(1.0, taupa) * np.hypot(1.0, tau))
        )
        tau = tau + dtau
        if np.all(np.abs(dtau) < 1e-15):
            break

    lat = np.degrees(np.arctan(tau))
    lon = np.degrees(lam) + zone.central_meridian_deg
    lon = (lon + 180.0) % 360.0 - 180.0
    if np.ndim(easting) == 0 and np.ndim(northing) == 0:
        return float(lat), float(lon)
    return lat, lon


def utm_zone_for_longitude(lon_deg):
    """UTM zone number containing a longitude in degrees."""
    lon = float(lon_deg)
    if not np.isfinite(lon):
        raise InputError("non-finite longitude")
    lon = (lon + 180.0) % 360.0 - 180.0
    return min(int((lon + 180.0) // 6.0) + 1, 60)

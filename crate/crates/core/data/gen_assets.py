#!/usr/bin/env python3
"""Regenerates the bundled spectral data assets in this directory.

All tables are coarse analytic band models, not line-by-line spectroscopy.
They reproduce the position and rough depth of the major absorption
features so that gaseous-transmittance masking behaves realistically.
"""
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def grid(start, stop, step):
    n = int(round((stop - start) / step))
    return [start + i * step for i in range(n + 1)]


def gauss(x, mu, sigma):
    return math.exp(-0.5 * ((x - mu) / sigma) ** 2)


def fmt(v):
    return repr(float(v))


def solar_irradiance():
    # Blackbody photosphere at 5778 K scaled to 1 AU, W m-2 nm-1.
    h, c, k = 6.62607015e-34, 2.99792458e8, 1.380649e-23
    t_sun = 5778.0
    r_sun, au = 6.957e8, 1.495978707e11
    rows = []
    for wl in grid(300.0, 2700.0, 1.0):
        lam = wl * 1e-9
        radiance = 2 * h * c * c / lam**5 / (math.exp(h * c / (lam * k * t_sun)) - 1)
        e0 = math.pi * radiance * (r_sun / au) ** 2 * 1e-9
        rows.append((wl, round(e0, 6)))
    with open(os.path.join(HERE, "solar_irradiance.csv"), "w") as f:
        f.write("wavelength_nm,irradiance_W_m2_nm\n")
        for wl, e0 in rows:
            f.write(f"{wl:.1f},{e0:.6f}\n")


def ozone():
    with open(os.path.join(HERE, "ozone_k.csv"), "w") as f:
        f.write("wavelength_nm,k_o3\n")
        for wl in grid(350.0, 2600.0, 2.5):
            k = 0.125 * gauss(wl, 603.0, 55.0)
            k += 0.6 * math.exp(-(wl - 310.0) / 9.0)
            k += 0.008 * gauss(wl, 760.0, 80.0)
            if k < 1e-6:
                k = 0.0
            f.write(f"{wl:.1f},{k:.6f}\n")


WV_BANDS = [
    # center, peak a, sigma, b
    (592.0, 0.006, 8.0, 0.60),
    (651.0, 0.010, 8.0, 0.60),
    (724.0, 0.060, 10.0, 0.58),
    (820.0, 0.060, 12.0, 0.58),
    (940.0, 0.650, 25.0, 0.57),
    (1135.0, 0.600, 22.0, 0.55),
    (1380.0, 3.000, 30.0, 0.52),
    (1875.0, 4.000, 40.0, 0.50),
    (2700.0, 6.000, 70.0, 0.50),
]


def water_vapour():
    with open(os.path.join(HERE, "water_vapour.csv"), "w") as f:
        f.write("wavelength_nm,a_wv,b_wv\n")
        for wl in grid(350.0, 2600.0, 2.5):
            weights = [(a * gauss(wl, mu, s), b) for mu, a, s, b in WV_BANDS]
            a = sum(w for w, _ in weights)
            b = sum(w * bb for w, bb in weights) / a if a > 1e-12 else 0.55
            if a < 1e-6:
                a = 0.0
            f.write(f"{wl:.1f},{a:.6f},{b:.4f}\n")


def oxygen():
    with open(os.path.join(HERE, "oxygen.csv"), "w") as f:
        f.write("wavelength_nm,a_o2\n")
        for wl in grid(350.0, 2600.0, 2.5):
            a = 1.40 * gauss(wl, 763.0, 9.0)
            a += 0.15 * gauss(wl, 688.0, 4.0)
            a += 0.05 * gauss(wl, 1268.0, 6.0)
            if a < 1e-6:
                a = 0.0
            f.write(f"{wl:.1f},{a:.6f}\n")


def aerosols():
    with open(os.path.join(HERE, "aerosol_models.csv"), "w") as f:
        f.write("name,angstrom,ssa,asymmetry\n")
        for row in [
            ("Continental", 1.3, 0.89, 0.67),
            ("Maritime", 0.5, 0.98, 0.75),
            ("Urban", 1.1, 0.81, 0.65),
            ("Desert", 0.2, 0.92, 0.73),
            ("BiomassBurning", 1.8, 0.87, 0.61),
        ]:
            f.write(",".join(str(x) for x in row) + "\n")


def bands():
    # 96 VNIR channels at 6 nm spacing, 132 SWIR channels from 1000 to 2450 nm.
    with open(os.path.join(HERE, "bands_228.csv"), "w") as f:
        f.write("index,center_nm,fwhm_nm\n")
        idx = 0
        for i in range(96):
            f.write(f"{idx},{420.0 + 6.0 * i:.3f},6.5\n")
            idx += 1
        for i in range(132):
            f.write(f"{idx},{1000.0 + 1450.0 * i / 131:.3f},10.0\n")
            idx += 1


if __name__ == "__main__":
    solar_irradiance()
    ozone()
    water_vapour()
    oxygen()
    aerosols()
    bands()

#!/usr/bin/env python3
"""Generate anchored_response.csv.

Synthetic two-state surface reflection data for the 5 GHz WiFi band. The
curves are smooth fills; only these points are fixed values:

    OFF magnitude minimum  -5.2 dB  at 5.560 GHz
    ON  magnitude minimum  -4.8 dB  at 5.150 GHz
    phase difference      180.0 deg at 5.530 GHz (maximum)
    phase difference       92.0 deg at 5.875 GHz (in-band minimum)

The last column is computed from the written phases with
wrap(x) = | ((x + 180) mod 360) - 180 |.
"""
import math

def wrap_diff(x):
    return abs(((x + 180.0) % 360.0) - 180.0)

def to_pm180(x):
    y = (x + 180.0) % 360.0 - 180.0
    return 180.0 if y == -180.0 else y

def mag_off(f):
    return -5.2 + 8.0 * (f - 5.56) ** 2

def mag_on(f):
    return -1.2 - 3.6 * math.exp(-(((f - 5.15) / 0.25) ** 2))

def phase_on(f):
    return -90.0 - 250.0 * (f - 5.53)

def diff(f):
    if f <= 5.53:
        return 180.0 - 300.0 * (5.53 - f) ** 2
    return 180.0 - (88.0 / 0.345 ** 2) * (f - 5.53) ** 2

freqs = [round(5.10 + 0.01 * k, 3) for k in range(81)]
freqs.append(5.875)
freqs.sort()

anchors_off = {5.56: -5.2}
anchors_on = {5.15: -4.8}
anchors_diff = {5.53: 180.0, 5.875: 92.0}

print("freq_ghz,mag_off_db,mag_on_db,phase_off_deg,phase_on_deg,phase_diff_deg")
for f in freqs:
    m_off = anchors_off.get(f, round(mag_off(f), 4))
    m_on = anchors_on.get(f, round(mag_on(f), 4))
    p_on = round(phase_on(f), 4)
    d = anchors_diff.get(f, round(diff(f), 4))
    p_off = round(to_pm180(p_on + d), 4)
    p_on = round(to_pm180(p_on), 4)
    col6 = wrap_diff(p_off - p_on)
    print(f"{f:.3f},{m_off:.4f},{m_on:.4f},{p_off:.4f},{p_on:.4f},{col6:.4f}")

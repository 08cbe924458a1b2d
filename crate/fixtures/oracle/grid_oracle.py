#!/usr/bin/env python3
"""Independent binning oracle for the grid-city fixture.

Reads a GeoJSON file, computes great-circle lengths and initial bearings with
plain math-module formulas, bins them into a north-centred symmetric circular
histogram, applies the default level table and prints a JSON summary.
Usage: grid_oracle.py <file.geojson> [bins]
"""
import json
import math
import sys

R = 6371000.0

def hav(lat1, lon1, lat2, lon2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * R * math.asin(math.sqrt(a))

def bearing(lat1, lon1, lat2, lon2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    y = math.sin(dl) * math.cos(p2)
    x = math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl)
    return math.degrees(math.atan2(y, x)) % 360.0

def main():
    path = sys.argv[1]
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 16
    width = 360.0 / n
    doc = json.load(open(path))
    bins = [0.0] * n
    for feat in doc["features"]:
        coords = feat["geometry"]["coordinates"]
        for (lon1, lat1), (lon2, lat2) in zip(coords, coords[1:]):
            length = hav(lat1, lon1, lat2, lon2)
            if length < 0.5:
                continue
            folded = bearing(lat1, lon1, lat2, lon2) % 180.0
            # brute force: test every half-circle bin for membership
            for i in range(n // 2):
                lo = i * width - width / 2
                hi = i * width + width / 2
                if lo <= folded < hi or lo <= folded - 180.0 < hi:
                    bins[i] += length
                    bins[i + n // 2] += length
                    break
    top = max(bins)
    values = [b / top if top > 0 else 0.0 for b in bins]
    text = ""
    for v in values:
        text += "." if v < 0.05 else "h" if v < 0.35 else "H" if v < 0.70 else "X"
    print(json.dumps({"bins": bins, "values": values, "pattern": text}, indent=1))

main()

#!/usr/bin/env python3
"""Generates the grid-city fixture: two north-south streets of five 100 m
segments each and one east-west street of five 100 m segments."""
import json
import math

R = 6371000.0
LAT0, LON0 = 48.2000000, 16.3700000

def dlat_for(m):
    return math.degrees(m / R)

def dlon_for(m, lat):
    # invert haversine for a pure-longitude displacement
    phi = math.radians(lat)
    h = math.sin(m / (2 * R)) ** 2
    return math.degrees(2 * math.asin(math.sqrt(h) / math.cos(phi)))

def street(fid, coords):
    return {
        "type": "Feature",
        "id": fid,
        "properties": {"highway": "residential", "name": fid},
        "geometry": {"type": "LineString", "coordinates": coords},
    }

dl = dlat_for(100.0)
features = []
for j, lon in enumerate([LON0, LON0 + 0.004]):
    coords = [[round(lon, 7), round(LAT0 + i * dl, 7)] for i in range(6)]
    features.append(street(f"ns-{j}", coords))

lat = LAT0 - 0.002
lon = LON0 - 0.001
coords = [[round(lon, 7), round(lat, 7)]]
for i in range(5):
    lon += dlon_for(100.0, lat)
    coords.append([round(lon, 7), round(lat, 7)])
features.append(street("ew-0", coords))

with open("grid.geojson", "w") as f:
    f.write('{"type": "FeatureCollection", "features": [\n')
    f.write(",\n".join(json.dumps(ft) for ft in features))
    f.write("\n]}\n")

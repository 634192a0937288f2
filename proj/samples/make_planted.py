"""Writes planted.csv: 5 independent sensor readings, 3 exact linear
combinations of them, and an imbalanced 3-class label."""
import csv
import numpy as np

rng = np.random.default_rng(7)
sizes = {"normal": 84, "spoof": 24, "flood": 12}
labels = [name for name, count in sizes.items() for _ in range(count)]
n = len(labels)

level = rng.normal(50.0, 5.0, n)
pump = rng.normal(10.0, 2.0, n)
valve = rng.normal(0.0, 1.0, n)
setpoint = rng.normal(20.0, 3.0, n)
crc = rng.normal(0.0, 1.0, n)
level, pump, valve, setpoint, crc = (np.round(v, 4) for v in (level, pump, valve, setpoint, crc))
for i, label in enumerate(labels):
    if label == "spoof":
        setpoint[i] += 8.0
    elif label == "flood":
        crc[i] += 4.0
        pump[i] += 3.0

columns = {
    "level": level,
    "pump": pump,
    "level_x2": 2.0 * level,
    "valve": valve,
    "setpoint": setpoint,
    "error": setpoint - level,
    "crc": crc,
    "drive": pump + valve - crc,
}

with open("planted.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(list(columns) + ["label"])
    for i in range(n):
        w.writerow([f"{columns[c][i]:.4f}" for c in columns] + [labels[i]])
